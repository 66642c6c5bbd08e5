import numpy as np
import pytest
from scipy import integrate, stats

from calex.calib import build_base_joint, fit_binned
from calex.core import (
    BinnedCurve,
    ClassConditionals,
    Histogram,
    IdentityCurve,
    JointDistribution,
    PlattCurve,
    ShapeError,
    StepCurve,
    hellinger,
    histogram_of,
    mix,
    prevalence_of,
    to_class_conditionals,
    uniform_edges,
)
from calex.estim import (
    TechniqueConfig,
    UnstableThresholdError,
    adjust_count,
    estimate,
    estimate_acc,
    estimate_cc,
    estimate_cpcc,
    estimate_median_sweep,
    estimate_mixture,
    estimate_pcc,
    median_sweep_estimates,
    mixture_distances,
    prevalence_grid,
)
from calex.gen import preset, simulate_intrinsic


def hist(mass):
    mass = np.asarray(mass, dtype=float)
    return Histogram(uniform_edges(len(mass)), mass / mass.sum())


def beta_conditionals(bins=20):
    e = uniform_edges(bins)
    pos = np.array([integrate.quad(stats.beta(10, 2).pdf, e[i], e[i + 1])[0] for i in range(bins)])
    neg = np.array([integrate.quad(stats.beta(2, 5).pdf, e[i], e[i + 1])[0] for i in range(bins)])
    return ClassConditionals(hist(pos), hist(neg), 0.2)


@pytest.fixture(scope="module")
def strong_base():
    return simulate_intrinsic(preset("intrinsic-strong-base"), 20_000, 31)


# -- config -----------------------------------------------------------------


@pytest.mark.parametrize("kwargs", [
    {"technique": "knn"}, {"threshold": 1.5}, {"grid_step": 0.0}, {"grid_step": 0.6},
    {"bins": 0}, {"denominator_guard": 1.0},
])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        TechniqueConfig(**kwargs)


# -- counting family --------------------------------------------------------


def test_pcc():
    assert estimate_pcc([0, 1]) == 0.5
    with pytest.raises(ValueError):
        estimate_pcc([])


def test_pcc_on_base_simulations(strong_base):
    # E[score] under the generating mixture: 0.2 * 10/12 + 0.8 * 2/7
    assert estimate_pcc(strong_base[0]) == pytest.approx(0.2 * 10 / 12 + 0.8 * 2 / 7, abs=0.005)
    assert estimate_pcc(strong_base[0]) == pytest.approx(0.3968, abs=0.01)


def test_cpcc_identity_equals_pcc(strong_base):
    assert estimate_cpcc(strong_base[0], IdentityCurve()) == pytest.approx(estimate_pcc(strong_base[0]), abs=1e-15)


def test_cpcc_binned_on_its_own_data(strong_base):
    s, y = strong_base
    assert estimate_cpcc(s, fit_binned(s, y, 20)) == pytest.approx(y.mean(), abs=1e-12)


def test_cpcc_bounded_by_curve_range():
    rng = np.random.default_rng(0)
    for _ in range(100):
        s = rng.random(int(rng.integers(1, 200)))
        curve = PlattCurve(rng.uniform(-30, 30), rng.uniform(-20, 20)) if rng.random() < 0.5 \
            else BinnedCurve(uniform_edges(8), rng.random(8))
        v = curve(s)
        assert v.min() - 1e-12 <= estimate_cpcc(s, curve) <= v.max() + 1e-12


def test_cc():
    assert estimate_cc([0.1, 0.6, 0.9], 0.0) == 1.0
    assert estimate_cc([0.1, 0.6, 0.9], 0.5) == pytest.approx(2 / 3)
    assert estimate_cc([0.3, 0.999, 1.0], 1.0) == pytest.approx(1 / 3)


def test_cc_monotone_in_threshold(strong_base):
    vals = [estimate_cc(strong_base[0], t) for t in np.linspace(0, 1, 101)]
    assert np.all(np.diff(vals) <= 0)


def test_adjust_count():
    assert adjust_count(0.45, 0.8, 0.1) == pytest.approx(0.5)
    assert adjust_count(0.05, 0.8, 0.1) == 0.0
    assert adjust_count(0.95, 0.8, 0.1) == 1.0
    with pytest.raises(UnstableThresholdError):
        adjust_count(0.5, 0.52, 0.5)


def test_acc_self_consistency(strong_base):
    s, y = strong_base
    joint = build_base_joint(s, fit_binned(s, y, 20), 20)
    checked = 0
    for t in np.linspace(0, 1, 41):
        try:
            v = estimate_acc(s, t, joint)
        except UnstableThresholdError:
            continue
        assert v == pytest.approx(prevalence_of(joint), abs=1e-9)
        checked += 1
    assert checked >= 30


def test_acc_guard():
    joint = JointDistribution(hist([0.5, 0.5]), IdentityCurve())
    with pytest.raises(UnstableThresholdError):
        estimate_acc([0.2, 0.7], 0.0, joint)


# -- mixture ----------------------------------------------------------------


def test_prevalence_grid():
    g = prevalence_grid(0.001)
    assert len(g) == 1001 and g[0] == 0 and g[-1] == 1
    g = prevalence_grid(0.3)
    assert g.tolist() == pytest.approx([0, 0.3, 0.6, 0.9, 1.0])


def test_mixture_exact_member():
    cc = beta_conditionals()
    assert estimate_mixture(mix(cc.f_pos, cc.f_neg, 0.3), cc) == pytest.approx(0.3, abs=0.001)


@pytest.mark.parametrize("p", np.round(np.arange(0, 1.0001, 0.05), 2))
def test_mixture_recovers_every_exact_mixture(p):
    rng = np.random.default_rng(int(p * 100))
    for cc in (beta_conditionals(), beta_conditionals(7)):
        assert estimate_mixture(mix(cc.f_pos, cc.f_neg, p), cc, 0.001) == pytest.approx(p, abs=0.001)
    while True:
        a, b = hist(rng.random(12)), hist(rng.random(12))
        if hellinger(a, b) > 0.1:
            break
    cc = ClassConditionals(a, b, 0.5)
    assert estimate_mixture(mix(a, b, p), cc, 0.01) == pytest.approx(p, abs=0.01)


def test_mixture_returns_global_grid_minimum():
    rng = np.random.default_rng(4)
    for _ in range(50):
        cc = ClassConditionals(hist(rng.random(10)), hist(rng.random(10)), 0.5)
        target = hist(rng.random(10))
        step = float(rng.choice([0.001, 0.01, 0.05]))
        p = estimate_mixture(target, cc, step)
        best = hellinger(mix(cc.f_pos, cc.f_neg, p), target)
        for q in prevalence_grid(step):
            assert best <= hellinger(mix(cc.f_pos, cc.f_neg, q), target) + 1e-12


def test_mixture_distances_match_hellinger():
    cc = beta_conditionals()
    target = hist(np.arange(1, 21))
    grid = [0.0, 0.2, 0.77, 1.0]
    d = mixture_distances(target, cc, grid)
    assert np.allclose(d, [hellinger(mix(cc.f_pos, cc.f_neg, q), target) for q in grid], atol=1e-12)


def test_mixture_ties_go_to_smaller_p():
    f = hist([0.5, 0.5])
    assert estimate_mixture(f, ClassConditionals(f, f, 0.5), 0.1) == 0.0


def test_mixture_mismatched_edges():
    cc = beta_conditionals()
    with pytest.raises(ShapeError):
        estimate_mixture(hist([1, 1, 1]), cc)


def test_mixture_on_intrinsic_strong_target(strong_base):
    s, y = strong_base
    joint = build_base_joint(s, fit_binned(s, y, 20), 20)
    t, _ = simulate_intrinsic(preset("intrinsic-strong-target"), 20_000, 32)
    p = estimate_mixture(histogram_of(t, 20), to_class_conditionals(joint))
    assert p == pytest.approx(0.6021, abs=0.015)


# -- median sweep -----------------------------------------------------------


def test_median_sweep_exact_mixture():
    cc = beta_conditionals()
    for p in (0.0, 0.13, 0.6, 1.0):
        ts, ests = median_sweep_estimates(mix(cc.f_pos, cc.f_neg, p), cc)
        assert len(ts) > 5
        assert np.allclose(ests, p, atol=1e-9)
        assert estimate_median_sweep(mix(cc.f_pos, cc.f_neg, p), cc) == pytest.approx(p, abs=1e-9)


def test_median_sweep_guard_excludes_everything():
    cc = beta_conditionals()
    with pytest.raises(UnstableThresholdError):
        estimate_median_sweep(cc.f_pos, cc, guard=1.0)


def test_median_sweep_self_consistency(strong_base):
    s, y = strong_base
    joint = build_base_joint(s, fit_binned(s, y, 20), 20)
    cc = to_class_conditionals(joint)
    _, ests = median_sweep_estimates(joint.density, cc)
    assert np.allclose(ests, prevalence_of(joint), atol=1e-9)


def test_median_sweep_even_count_takes_middle_mean():
    # two valid thresholds with estimates 0.2 and 0.4 -> 0.3
    f_pos = hist([0.0, 0.5, 0.5])
    f_neg = hist([0.5, 0.5, 0.0])
    cc = ClassConditionals(f_pos, f_neg, 0.5)
    target = hist([0.4, 0.4, 0.2])
    ts, ests = median_sweep_estimates(target, cc)
    assert ests.tolist() == pytest.approx([0.2, 0.4])
    assert estimate_median_sweep(target, cc) == pytest.approx(0.3)


def test_median_sweep_intrinsic_strong_with_true_curve():
    # base joint from the exact class-conditional bin masses; target simulated
    cc = beta_conditionals()
    t, _ = simulate_intrinsic(preset("intrinsic-strong-target"), 20_000, 33)
    target = histogram_of(t, 20)
    ms = estimate_median_sweep(target, cc)
    assert ms == pytest.approx(0.60, abs=0.02)
    assert ms == pytest.approx(estimate_mixture(target, cc), abs=0.02)


# -- dispatcher -------------------------------------------------------------


def test_estimate_dispatch(strong_base):
    s, y = strong_base
    joint = build_base_joint(s, fit_binned(s, y, 20), 20)
    assert estimate(TechniqueConfig("pcc"), s, joint) == estimate_pcc(s)
    assert estimate(TechniqueConfig("cpcc"), s, joint) == pytest.approx(y.mean(), abs=1e-12)
    assert estimate(TechniqueConfig("cc", threshold=0.5), s, joint) == estimate_cc(s, 0.5)
    for tech in ("acc", "mixture", "median_sweep"):
        assert estimate(TechniqueConfig(tech), s, joint) == pytest.approx(prevalence_of(joint), abs=0.001)


def test_step_curve_joint_acc():
    # step curve at a bin edge makes tpr = 1, fpr = 0, so acc = cc on binned data
    joint = JointDistribution(hist(np.ones(10)), StepCurve(0.5, 0, 1))
    s = np.array([0.05, 0.55, 0.65, 0.95])
    assert estimate_acc(s, 0.5, joint) == pytest.approx(0.75)
