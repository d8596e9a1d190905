# src/robust_qlr/utils/rng.py
"""
Subfluxos determinísticos de números aleatórios

Cada tarefa (índice de β₀, replicação, ponto inicial do otimizador, draws da
lei limite) recebe o seu próprio gerador derivado da semente mestre por uma
chave fixa. O resultado não depende da ordem de execução nem do número de
processos.
"""
import zlib
from typing import Union

import numpy as np

Key = Union[int, str]

# Rótulos estáveis de subsistemas
STREAM_DATA = "data"
STREAM_STARTS = "starts"
STREAM_LIMIT = "limit"


def _key_to_int(key: Key) -> int:
    # Nunca usar hash() do Python: é aleatorizado por processo
    if isinstance(key, str):
        return zlib.crc32(key.encode("utf-8")) & 0xFFFFFFFF
    if key < 0:
        raise ValueError("Chaves de subfluxo devem ser não negativas")
    return int(key)


def substream(seed: int, *keys: Key) -> np.random.Generator:
    """
    Retorna um gerador contador (Philox) derivado de (seed, keys)

    Args:
        seed: Semente mestre da execução
        *keys: Caminho do subfluxo, por exemplo ("data", indice_beta, rep)

    Returns:
        np.random.Generator: Gerador independente para a chave
    """
    spawn_key = tuple(_key_to_int(k) for k in keys)
    sequence = np.random.SeedSequence(int(seed), spawn_key=spawn_key)
    return np.random.Generator(np.random.Philox(sequence))


def derive_seed(seed: int, *keys: Key) -> int:
    """Deriva uma semente inteira estável de 63 bits para (seed, keys)"""
    spawn_key = tuple(_key_to_int(k) for k in keys)
    state = np.random.SeedSequence(int(seed), spawn_key=spawn_key).generate_state(2, np.uint32)
    return (int(state[0]) << 31) ^ int(state[1])
