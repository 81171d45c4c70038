"""Small arithmetic-expression language for user-supplied heights and curves.

Grammar (whitespace insignificant)::

    expr    := term (("+" | "-") term)*
    term    := factor (("*" | "/") factor)*
    factor  := ("+" | "-") factor | power
    power   := atom ("^" factor)?
    atom    := NUMBER | NAME | FUNC "(" expr ")" | "(" expr ")"
    FUNC    := "sin" | "cos" | "exp" | "sqrt"
    NAME    := one of the allowed variables, or the constant "pi"

``**`` is accepted as a synonym for ``^``.  Exponentiation is right
associative and binds tighter than unary minus, so ``-u^2`` is ``-(u^2)``.
Expressions are parsed with :mod:`ast` and translated node by node into
sympy, so nothing is ever evaluated as Python code.
"""
import ast

import sympy as sp

FUNCTIONS = {"sin": sp.sin, "cos": sp.cos, "exp": sp.exp, "sqrt": sp.sqrt}
CONSTANTS = {"pi": sp.pi}

_BINOPS = {
    ast.Add: lambda a, b: a + b,
    ast.Sub: lambda a, b: a - b,
    ast.Mult: lambda a, b: a * b,
    ast.Div: lambda a, b: a / b,
    ast.Pow: lambda a, b: a**b,
}


class ExpressionError(ValueError):
    pass


def parse_expression(text, variables):
    """Translate ``text`` into a sympy expression over ``variables``.

    ``variables`` maps names to sympy symbols, e.g. ``{"u": u, "v": v}``.
    """
    if not isinstance(text, str) or not text.strip():
        raise ExpressionError("expression must be a non-empty string")
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse {text!r}: {exc.msg} at column {exc.offset}") from None
    return _convert(tree.body, variables, text)


def _convert(node, variables, text):
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        left = _convert(node.left, variables, text)
        right = _convert(node.right, variables, text)
        return _BINOPS[type(node.op)](left, right)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        operand = _convert(node.operand, variables, text)
        return -operand if isinstance(node.op, ast.USub) else operand
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        return sp.nsimplify(node.value) if isinstance(node.value, int) else sp.Float(node.value)
    if isinstance(node, ast.Name):
        if node.id in variables:
            return variables[node.id]
        if node.id in CONSTANTS:
            return CONSTANTS[node.id]
        raise ExpressionError(f"unknown name {node.id!r} in {text!r}; allowed: {sorted(variables)} and pi")
    if isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in FUNCTIONS:
            raise ExpressionError(f"unsupported function call in {text!r}; allowed: {sorted(FUNCTIONS)}")
        if len(node.args) != 1 or node.keywords:
            raise ExpressionError(f"{node.func.id} takes exactly one argument")
        return FUNCTIONS[node.func.id](_convert(node.args[0], variables, text))
    raise ExpressionError(f"unsupported syntax in {text!r}")
