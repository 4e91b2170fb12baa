from __future__ import annotations

import dartfx.rbf as rbf


def test_public_exports() -> None:
    for name in rbf.__all__:
        assert hasattr(rbf, name), name
    for name in ("eval_interpolant", "eval_interpolant_gradient", "project_tangent", "rank_nullity"):
        assert name in rbf.__all__
