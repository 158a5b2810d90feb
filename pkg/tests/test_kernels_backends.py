"""Compiled core versus numpy fallback: elementwise kernels must agree to the
bit, reductions to rounding, and whole trajectories to the bit."""

import os
import subprocess
import sys

import numpy as np
import pytest

from ctns import _kernels
from ctns._kernels import _numpy_impl

_core = pytest.importorskip(
    "ctns._kernels._core",
    reason="compiled kernel extension is not available in this build")


def spectral_pair(rng, nx=32, ny=32):
    nyh = ny // 2 + 1
    re = rng.standard_normal((nx, nyh))
    im = rng.standard_normal((nx, nyh))
    return np.ascontiguousarray(re + 1j * im)


@pytest.fixture
def data():
    rng = np.random.default_rng(99)
    nx = ny = 32
    nyh = ny // 2 + 1
    kx = np.ascontiguousarray(rng.standard_normal((nx, nyh)))
    ky = np.ascontiguousarray(rng.standard_normal((nx, nyh)))
    ksq = kx * kx + ky * ky
    inv = np.zeros_like(ksq)
    inv[ksq > 0] = 1.0 / ksq[ksq > 0]
    return {
        "rng": rng, "nx": nx, "ny": ny,
        "f": spectral_pair(rng), "g": spectral_pair(rng),
        "noise": spectral_pair(rng),
        "decay": np.ascontiguousarray(rng.uniform(0.0, 1.0, (nx, nyh))),
        "mask": np.ascontiguousarray(
            rng.integers(0, 2, (nx, nyh)).astype(np.float64)),
        "kx": kx, "ky": ky, "inv": np.ascontiguousarray(inv),
        "a": np.ascontiguousarray(rng.standard_normal((nx, ny))),
        "b": np.ascontiguousarray(rng.standard_normal((nx, ny))),
        "c": np.ascontiguousarray(rng.standard_normal((nx, ny))),
        "d": np.ascontiguousarray(rng.standard_normal((nx, ny))),
        "pos": np.ascontiguousarray(rng.uniform(-0.1, 2.0, (nx, ny))),
    }


def assert_bitwise(lhs, rhs, label):
    lhs = lhs if isinstance(lhs, tuple) else (lhs,)
    rhs = rhs if isinstance(rhs, tuple) else (rhs,)
    for le, ri in zip(lhs, rhs):
        assert np.array_equal(np.asarray(le), np.asarray(ri)), label


def test_elementwise_kernels_match_bitwise(data):
    dt = 1e-3
    cases = [
        ("semigroup_apply", (data["f"], data["decay"])),
        ("semigroup_combine", (data["f"], data["g"], data["decay"], dt)),
        ("semigroup_combine_noise",
         (data["f"], data["g"], data["noise"], data["decay"], dt)),
        ("spectral_gradient", (data["f"], data["kx"], data["ky"])),
        ("flux_divergence",
         (data["f"], data["g"], data["kx"], data["ky"], data["mask"])),
        ("masked_scale", (data["f"], data["mask"])),
        ("leray_project",
         (data["f"], data["g"], data["kx"], data["ky"], data["inv"])),
        ("multiply", (data["a"], data["b"])),
        ("transport_flux", (data["pos"], data["a"], data["b"], data["c"])),
    ]
    for name, args in cases:
        got = getattr(_core, name)(*args)
        want = getattr(_numpy_impl, name)(*args)
        assert_bitwise(got, want, name)


def test_transport_flux_accepts_read_only_broadcast(data):
    # constant sensitivities arrive as read-only (but contiguous) views, the
    # shape np.broadcast_to produces for an already-full-size array
    chi = np.broadcast_to(np.ones(data["a"].shape), data["a"].shape)
    assert not chi.flags.writeable and chi.flags.c_contiguous
    got = _core.transport_flux(data["pos"], data["a"], chi, data["c"])
    want = _numpy_impl.transport_flux(data["pos"], data["a"], chi, data["c"])
    assert np.array_equal(got, want)


def test_reductions_match_to_rounding(data):
    got = _core.vector_max(data["a"], data["b"])
    want = _numpy_impl.vector_max(data["a"], data["b"])
    assert got == pytest.approx(want, rel=1e-13)

    gs = _core.scaled_vector_max(np.abs(data["c"]), data["a"], data["b"])
    ws = _numpy_impl.scaled_vector_max(np.abs(data["c"]), data["a"], data["b"])
    assert gs == pytest.approx(ws, rel=1e-13)

    gn, gf = _core.nlogn_sum(data["pos"], 1e-12)
    wn, wf = _numpy_impl.nlogn_sum(data["pos"], 1e-12)
    assert gn == pytest.approx(wn, rel=1e-12)
    assert gf == wf  # floored-cell count is integer-exact

    gh = _core.hessian_defect_sum(data["a"], data["b"], data["c"],
                                  data["d"], data["a"], data["b"])
    wh = _numpy_impl.hessian_defect_sum(data["a"], data["b"], data["c"],
                                        data["d"], data["a"], data["b"])
    assert gh == pytest.approx(wh, rel=1e-12)

    gq, gc = _core.quartic_cross_sums(data["a"], data["b"], data["pos"])
    wq, wc = _numpy_impl.quartic_cross_sums(data["a"], data["b"], data["pos"])
    assert gq == pytest.approx(wq, rel=1e-12)
    assert gc == pytest.approx(wc, rel=1e-12)


def test_backend_reports_a_name():
    assert _kernels.backend() in ("cython", "numpy")


_TRAJ_SCRIPT = """
import numpy as np
from ctns import CoefficientSet, StepperConfig, default_initial, make_grid, run
from ctns.noise import make_noise_model

g = make_grid(32, 32)
coeffs = CoefficientSet(delta=0.01, mu=0.01, nu=0.01)
model = make_noise_model(g, 6, q0=0.05, b_scale=0.5, seed=3)
cfg = StepperConfig(dt=1e-3, t_final=0.03, coeffs=coeffs, noise=model)
traj = run(cfg, default_initial(g, preset="benchmark"))
f = traj.final
np.save(OUT, np.stack([f.n.values, f.c.values, f.u.x, f.u.y]))
"""


def test_full_trajectories_are_bitwise_identical_across_backends(tmp_path):
    outs = {}
    for name in ("cython", "numpy"):
        out = tmp_path / f"{name}.npy"
        env = dict(os.environ, CTNS_KERNELS=name)
        code = f"OUT = {str(out)!r}\n" + _TRAJ_SCRIPT
        proc = subprocess.run([sys.executable, "-c", code], env=env,
                              capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        outs[name] = np.load(out)
    assert np.array_equal(outs["cython"], outs["numpy"])
