"""Smoke test for the tailfit_py extension module.

Build it with ``maturin develop -m crates/python/Cargo.toml`` or copy the
cdylib next to this file as ``tailfit_py.so``, then run ``python smoke_test.py``.
"""

import math

import tailfit_py as tf


def main():
    model = tf.ParzenModel(2.0)
    assert math.isclose(model.fq(0.1), 0.01, rel_tol=1e-12)
    assert math.isclose(model.quantile(0.25), -2.0, rel_tol=1e-12)

    sample = model.anchored().sample(700, 2024)
    assert len(sample) == 700 and sample == sorted(sample)

    fit = tf.estimate_tail(sample, weight="u/300")
    assert 1.5 <= fit.nu_hat <= 2.6, fit
    assert len(fit.grid) == 280
    assert max(abs(r) for r in fit.residuals()) < 5.0

    alpha = tf.hill(sample, 100, tail="left")
    assert abs(1.0 + alpha - 2.0) < 0.4, alpha

    rep = tf.asymptotic_variance(tf.ParzenModel(1.2, [0.0, 1.0]), 0.1, 0.4)
    assert abs(rep.variance - 822.13) / 822.13 < 5e-3, rep

    rows = tf.simulate([2.0], n=300, reps=4, estimators="hill,ols:1", k_n=40)
    assert [r[1] for r in rows] == ["hill", "ols:1"]
    assert rows == tf.simulate([2.0], n=300, reps=4, estimators="hill,ols:1", k_n=40, threads=1)

    assert tf.parse_weight("1+cos(u)") == "(1.0 + cos(u))", tf.parse_weight("1+cos(u)")
    try:
        tf.estimate_tail(sample, a=0.5, b=0.4)
    except tf.TailfitError as e:
        assert str(e).startswith("ConfigError"), e
    else:
        raise AssertionError("expected TailfitError")

    print("python smoke test ok")


if __name__ == "__main__":
    main()
