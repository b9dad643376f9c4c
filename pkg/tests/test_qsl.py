import math

import numpy as np
import pytest

from randers_qsl import matcore, qsl, randers
from randers_qsl.errors import SchemaError, ValidationError
from randers_qsl.hamiltonians import ControlProblem, build_pauli

from conftest import random_problem, random_su

T_SINGLE_SPIN = 5 * math.pi / 13
T_SWAP_PRINCIPAL = math.pi * (1 + math.sqrt(2)) / 4
T_SWAP_BEST = 1.0616973464541444


def spin(bx, by, d):
    return qsl.preset("single-spin", {"B_x": bx, "B_y": by, "D": d})


def random_instance(rng, n):
    p = random_problem(rng, n)
    return p, qsl.TargetGate.from_unitary(random_su(rng, n, scale=1.5))


def test_single_spin_value(single_spin):
    p, g = single_spin
    res = qsl.t_opt_closed_form(p, g)
    assert res.t_opt == pytest.approx(T_SINGLE_SPIN, rel=1e-13)
    assert res.root_sign == -1
    assert res.rho == pytest.approx(1 / 0.09, rel=1e-13)
    assert res.diagnostics["route"] == "closed_form"


def test_single_spin_against_the_drift():
    # B_y < 0 means the drift pushes away from the target
    res = qsl.t_opt_closed_form(*spin(0.0, -0.3, 1.0))
    assert res.t_opt == pytest.approx(5 * math.pi / 7, rel=1e-13)
    assert res.root_sign == 1


def test_wind_sign_rule(rng):
    for _ in range(30):
        by = rng.uniform(0.05, 0.9)
        d = rng.uniform(by + 0.05, 2.0)
        helped = qsl.t_opt_closed_form(*spin(0.0, by, d))
        hindered = qsl.t_opt_closed_form(*spin(0.0, -by, d))
        assert helped.t_opt < hindered.t_opt
        assert (helped.root_sign, hindered.root_sign) == (-1, 1)


def test_displayed_single_spin_formula_is_reversed_drift(rng):
    for _ in range(50):
        d = rng.uniform(0.5, 3)
        b = rng.uniform(0, 0.95 * d)
        th = rng.uniform(0, 2 * math.pi)
        bx, by = b * math.cos(th), b * math.sin(th)
        t = qsl.t_opt_closed_form(*spin(bx, by, d)).t_opt
        assert t == pytest.approx(qsl.single_spin_formula(-bx, -by, d), rel=1e-11)


def test_displayed_swap_formula_is_reversed_drift(rng):
    for _ in range(20):
        lam = rng.uniform(-1, 1, 3)
        alpha = rng.uniform(0.05, 0.95) / (4 * lam @ lam)
        p, g = qsl.preset("swap-chain", {"lambda": list(lam), "alpha": alpha})
        t = qsl.t_opt_closed_form(p, g).t_opt
        assert t == pytest.approx(qsl.swap_chain_formula(*(-lam), alpha), rel=1e-10)


def test_zero_overlap_route():
    # B_y = 0 gives Tr(H0 log O) = 0 and the quadratic route
    res = qsl.t_opt_closed_form(*spin(0.4, 0.0, 1.0))
    assert res.diagnostics["route"] == "quadratic"
    assert res.t_opt == pytest.approx(math.pi / (2 * math.sqrt(1 - 0.16)), rel=1e-13)


def test_zero_drift():
    p = ControlProblem(np.zeros((2, 2)), 2.0)
    res = qsl.t_opt_closed_form(p, qsl.TargetGate.from_unitary(qsl.IY))
    assert res.t_opt == pytest.approx(math.pi / 2, rel=1e-13)
    assert math.isinf(res.rho)


def test_quadratic_root_homogeneity(rng):
    # scaling H0 and sqrt(budget) by c scales T by 1/c
    for _ in range(20):
        p, g = random_instance(rng, 2)
        c = rng.uniform(0.1, 10)
        t1 = qsl.budget_quadratic_root(p, g.branch)
        t2 = qsl.budget_quadratic_root(ControlProblem(c * p.h0, c * c * p.budget), g.branch)
        assert t2 == pytest.approx(t1 / c, rel=1e-12)


def test_quadratic_root_at_boundary():
    p = ControlProblem(build_pauli([("Y", 1.0)]), 2.0)
    with pytest.raises(ValidationError):
        qsl.budget_quadratic_root(p, matcore.logm_special_unitary(qsl.IY))
    # helped by the drift: at the boundary the root survives
    t = qsl.budget_quadratic_root(p, matcore.logm_special_unitary(qsl.IY), relax=True)
    assert t > 0
    # drift against the target: no positive root
    q = ControlProblem(build_pauli([("Y", -1.0)]), 2.0)
    with pytest.raises(ValidationError):
        qsl.budget_quadratic_root(q, matcore.logm_special_unitary(qsl.IY), relax=True)


@pytest.mark.parametrize("n", [2, 4])
def test_closed_form_equals_quadratic_root(rng, n):
    for _ in range(100):
        p, g = random_instance(rng, n)
        res = qsl.t_opt_closed_form(p, g)
        assert res.t_opt == pytest.approx(qsl.budget_quadratic_root(p, g.branch), rel=1e-10)


def test_trace_is_purely_imaginary(rng):
    for _ in range(50):
        p, g = random_instance(rng, 3)
        tr = np.trace(p.h0 @ g.branch.matrix)
        assert abs(tr.real) <= 1e-12 * max(1.0, abs(tr))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_control_meets_budget_and_reaches_target(rng, n):
    for _ in range(20):
        p, g = random_instance(rng, n)
        res = qsl.t_opt_closed_form(p, g)
        assert abs(res.diagnostics["budget_residual"]) <= 1e-9 * p.budget
        assert np.linalg.norm(res.hc_opt - res.hc_opt.conj().T) <= 1e-12
        assert abs(np.trace(res.hc_opt)) <= 1e-10
        u = matcore.expm_hermitian_generator(p.h0 + res.hc_opt, res.t_opt)
        assert np.linalg.norm(u - g.o) <= 1e-8


def test_length_of_optimal_path_is_its_time(rng):
    for _ in range(10):
        p, g = random_instance(rng, 2)
        res = qsl.t_opt_closed_form(p, g)
        nav = randers.NavigationData(p)
        sched = randers.ControlSchedule(((res.hc_opt, res.t_opt),))
        assert randers.curve_length(nav, sched) == pytest.approx(res.t_opt, rel=1e-8)


def test_more_budget_is_faster(rng):
    for _ in range(50):
        p, g = random_instance(rng, int(rng.choice([2, 4])))
        t1 = qsl.t_opt_closed_form(p, g).t_opt
        t2 = qsl.t_opt_closed_form(ControlProblem(p.h0, 2 * p.budget), g).t_opt
        assert t2 < t1


def test_no_speed_limit_at_large_rho():
    h0 = build_pauli([("Y", 0.3)])
    p = ControlProblem(h0, 1e8 * np.trace(h0 @ h0).real)
    res = qsl.t_opt_closed_form(p, qsl.TargetGate.from_unitary(qsl.IY))
    assert res.rho == pytest.approx(1e8)
    assert res.t_opt < 1e-3
    assert res.t_opt == pytest.approx(math.pi / (2 * math.sqrt(p.budget / 2)), rel=1e-3)


def test_identity_target():
    p = ControlProblem(build_pauli([("X", 0.3)]), 1.0)
    res = qsl.t_opt_closed_form(p, qsl.TargetGate.from_unitary(np.eye(2)))
    assert res.t_opt == 0
    assert not res.hc_defined
    assert res.to_json()["hc_opt"] is None
    brs = qsl.t_opt_over_branches(p, np.eye(2), 1)
    assert brs[0].t_opt == 0 and all(b.t_opt > 0 for b in brs[1:])


def test_swap_principal_and_branches(swap_chain):
    p, g = swap_chain
    res = qsl.t_opt_closed_form(p, g)
    assert res.t_opt == pytest.approx(T_SWAP_PRINCIPAL, rel=1e-12)
    only = qsl.t_opt_over_branches(p, g.o, 0)
    assert len(only) == 1 and only[0].t_opt == pytest.approx(T_SWAP_PRINCIPAL, rel=1e-12)
    brs = qsl.t_opt_over_branches(p, g.o, 1)
    times = [b.t_opt for b in brs]
    assert times == sorted(times)
    assert qsl.min_branch_time(p, g.o) == pytest.approx(T_SWAP_BEST, rel=1e-12)
    for b in brs:
        u = matcore.expm_hermitian_generator(p.h0 + b.hc_opt, b.t_opt)
        assert np.linalg.norm(u - g.o) <= 1e-8


def test_target_gate_rejects_foreign_branch():
    wrong = matcore.logm_special_unitary(qsl.SWAP_SU4)
    with pytest.raises(ValidationError):
        qsl.TargetGate.from_unitary(np.diag([1j, 1j, -1j, -1j]), wrong)


def test_presets_validate():
    with pytest.raises(ValidationError):
        spin(0.6, 0.8, 1.0)
    with pytest.raises(ValidationError):
        qsl.preset("swap-chain", {"lambda": [1, 1, 1], "alpha": 1 / 12})
    with pytest.raises(SchemaError):
        qsl.preset("swap-chain", {"lambda": [1, 1], "alpha": 0.01})
    with pytest.raises(SchemaError):
        qsl.preset("single-spin", {"B_x": 0.1})
    with pytest.raises(SchemaError):
        qsl.preset("toffoli", {})


def test_preset_report_swap():
    rep = qsl.preset_report("swap-chain", {"lambda": [1, 1, 1], "alpha": 1 / 24})
    assert rep["rho"] == pytest.approx(2, rel=1e-13)
    assert rep["tr_H0_logO"][0] == pytest.approx(0, abs=1e-12)
    assert rep["tr_H0_logO"][1] == pytest.approx(3 * math.pi, rel=1e-13)
    assert rep["tr_logO_sq"] == pytest.approx(-3 * math.pi**2 / 4, rel=1e-13)
    assert rep["tr_H0_sq"] == pytest.approx(12, rel=1e-13)
    assert rep["t_opt_displayed_formula"] == pytest.approx(math.pi * (math.sqrt(2) - 1) / 4, rel=1e-12)
    assert rep["t_opt_reversed_drift"] == pytest.approx(rep["t_opt_displayed_formula"], rel=1e-12)


def test_preset_report_single_spin():
    rep = qsl.preset_report("single-spin", {"B_x": 0.0, "B_y": 0.3, "D": 1.0})
    assert rep["t_opt"] == pytest.approx(T_SINGLE_SPIN, rel=1e-13)
    assert rep["t_opt_displayed_formula"] == pytest.approx(5 * math.pi / 7, rel=1e-13)
    assert rep["tr_logO_sq"] == pytest.approx(-math.pi**2 / 2, rel=1e-13)
    assert rep["tr_H0_logO"][1] == pytest.approx(-0.3 * math.pi, rel=1e-13)
