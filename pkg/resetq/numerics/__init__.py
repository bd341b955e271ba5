from resetq.numerics.jet import Jet, jet_combine, jexp, jlog, jpow, jsqrt
from resetq.numerics.optimize import Bracket, Minimum, finite_difference, minimize_unimodal
from resetq.numerics.quadrature import QuadratureResult, integrate, integrate_semi_infinite

__all__ = [
    'Bracket',
    'Jet',
    'Minimum',
    'QuadratureResult',
    'finite_difference',
    'integrate',
    'integrate_semi_infinite',
    'jet_combine',
    'jexp',
    'jlog',
    'jpow',
    'jsqrt',
    'minimize_unimodal',
]
