"""Tiny arithmetic expression compiler for user-supplied activations.

Grammar: Python expression syntax restricted to the variable ``x``, numeric
literals, the constants ``pi`` and ``e``, the operators ``+ - * / **`` and
unary minus, and the functions exp, ln, log, abs, max, min, erf, sqrt,
tanh, sign. Everything is evaluated with numpy so compiled callables accept
scalars and arrays alike.
"""

import ast

import numpy as np
from scipy import special

_FUNCTIONS = {
    "exp": np.exp,
    "ln": np.log,
    "log": np.log,
    "abs": np.abs,
    "max": np.maximum,
    "min": np.minimum,
    "erf": special.erf,
    "sqrt": np.sqrt,
    "tanh": np.tanh,
    "sign": np.sign,
}

_CONSTANTS = {"pi": np.pi, "e": np.e}

_BINOPS = {
    ast.Add: np.add,
    ast.Sub: np.subtract,
    ast.Mult: np.multiply,
    ast.Div: np.divide,
    ast.Pow: np.power,
}


class ExprError(ValueError):
    pass


def _build(node):
    """Recursively turn an AST node into a closure of x."""
    if isinstance(node, ast.Expression):
        return _build(node.body)
    if isinstance(node, ast.Constant):
        if not isinstance(node.value, (int, float)):
            raise ExprError(f"non-numeric literal {node.value!r}")
        v = float(node.value)
        return lambda x: v
    if isinstance(node, ast.Name):
        if node.id == "x":
            return lambda x: x
        if node.id in _CONSTANTS:
            v = _CONSTANTS[node.id]
            return lambda x: v
        raise ExprError(f"unknown name {node.id!r}")
    if isinstance(node, ast.BinOp):
        op = _BINOPS.get(type(node.op))
        if op is None:
            raise ExprError(f"operator {type(node.op).__name__} not allowed")
        lhs, rhs = _build(node.left), _build(node.right)
        return lambda x: op(lhs(x), rhs(x))
    if isinstance(node, ast.UnaryOp):
        if isinstance(node.op, ast.USub):
            operand = _build(node.operand)
            return lambda x: np.negative(operand(x))
        if isinstance(node.op, ast.UAdd):
            return _build(node.operand)
        raise ExprError(f"operator {type(node.op).__name__} not allowed")
    if isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.keywords:
            raise ExprError("only plain calls to named functions are allowed")
        fn = _FUNCTIONS.get(node.func.id)
        if fn is None:
            raise ExprError(f"unknown function {node.func.id!r}")
        args = [_build(a) for a in node.args]
        if len(args) == 1:
            (a0,) = args
            return lambda x: fn(a0(x))
        if len(args) == 2:
            a0, a1 = args
            return lambda x: fn(a0(x), a1(x))
        raise ExprError("functions take one or two arguments")
    raise ExprError(f"syntax element {type(node).__name__} not allowed")


def compile_expr(source: str):
    """Compile ``source`` to a callable of one numeric argument."""
    try:
        tree = ast.parse(source, mode="eval")
    except SyntaxError as exc:
        raise ExprError(f"cannot parse {source!r}: {exc.msg}") from None
    body = _build(tree)
    return lambda x: np.asarray(body(np.asarray(x, dtype=float)), dtype=float)
