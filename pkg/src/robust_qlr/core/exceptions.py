"""
Hierarquia de exceções do robust-qlr

InputError -> código de saída 2 na CLI
NumericalError -> código de saída 3 na CLI
"""


class RQLRError(Exception):
    """Exceção base do pacote"""

    exit_code = 1


class InputError(RQLRError):
    """Dados ou configuração de entrada inválidos"""

    exit_code = 2


class NumericalError(RQLRError):
    """Falha numérica (singularidade, não convergência)"""

    exit_code = 3


class InsufficientData(InputError):
    """Amostra pequena demais para estimar os momentos"""
    pass


class NonFiniteData(InputError):
    """Dados com NaN ou infinito"""
    pass


class EmptyCrossSection(InputError):
    """Seção transversal B(π) vazia: π fora do espaço projetado"""
    pass


class SingularTau(NumericalError):
    """Denominador de τ(π,β) numericamente nulo"""
    pass


class NotInvertible(NumericalError):
    """θ fora da imagem do espaço estrutural"""
    pass


class NoConvergence(NumericalError):
    """Nenhum ponto inicial do otimizador convergiu"""
    pass


class SingularJ11(NumericalError):
    """J₁₁ mal condicionada (número de condição > 1e12)"""
    pass


class InfeasiblePolyhedron(NumericalError):
    """Poliedro sem ponto viável"""
    pass


class InfeasibleRestriction(NumericalError):
    """Restrição nula incompatível com o espaço de parâmetros"""
    pass
