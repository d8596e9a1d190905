"""
robust-qlr: inferência de distância mínima robusta à identificação fraca e a
parâmetros na fronteira, para modelos de um e dois fatores
"""

__version__ = "0.1.0"
