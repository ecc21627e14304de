"""Minimal computer-algebra kernel: AST, parser, differentiation, zero testing."""
from .chart import Chart
from .nodes import FUNCTIONS, ONE, ZERO, Add, Const, Div, Expr, Func, Mul, Pow, Var, lift, to_text
from .ops import compile_expr, diff, evaluate, free_vars, substitute
from .parse import parse
from .simplify import constant_value, simplify
from .zero import SamplingConfig, Verdict, ZeroTest, is_zero, sample_points, sampling, sampling_config, zero_test

__all__ = [
    "Add", "Chart", "Const", "Div", "Expr", "FUNCTIONS", "Func", "Mul", "ONE", "Pow",
    "SamplingConfig", "Var", "Verdict", "ZERO", "ZeroTest", "compile_expr", "constant_value",
    "diff", "evaluate", "free_vars", "is_zero", "lift", "parse", "sample_points", "sampling",
    "sampling_config", "simplify", "substitute", "to_text", "zero_test",
]
