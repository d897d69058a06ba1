import pytest

from forcelab import (EMPTY, BudgetError, FiniteStructure, ForcelabError,
                      RecursionInstance, atom_in_class, etr_solve, hf_rank,
                      perturb, v_stage, var, verify_solution)
from forcelab.truth import formula_step


def constant_instance(A):
    return RecursionInstance(
        length=3, domain=tuple(v_stage(3)),
        step=lambda x, alpha, view, param: x in param, parameter=frozenset(A),
        label="constant")


def test_constant_recursion():
    A = [EMPTY, v_stage(3)[2]]
    sol = etr_solve(constant_instance(A))
    assert all(s == frozenset(A) for s in sol.slices)
    assert verify_solution(constant_instance(A), sol) == (True, None)


def cumulative_instance():
    domain = tuple(v_stage(3))

    def step(x, alpha, view, _param):
        return all(any(view(beta, y) for beta in range(alpha)) for y in x.children)

    return RecursionInstance(length=4, domain=domain, step=step, label="cumulative")


def test_cumulative_hierarchy_recursion():
    sol = etr_solve(cumulative_instance())
    for alpha, slice_ in enumerate(sol.slices):
        assert slice_ == {x for x in v_stage(3) if hf_rank(x) <= alpha}


def test_verify_rejects_perturbations():
    inst = cumulative_instance()
    sol = etr_solve(inst)
    for alpha in range(inst.length):
        for x in inst.domain[:3]:
            ok, where = verify_solution(inst, perturb(sol, alpha, x))
            assert not ok and where is not None


def test_uniqueness_by_exhaustive_perturbation():
    inst = constant_instance([EMPTY])
    sol = etr_solve(inst)
    for alpha in range(inst.length):
        for x in inst.domain:
            assert not verify_solution(inst, perturb(sol, alpha, x))[0]


def test_budget():
    inst = RecursionInstance(length=10 ** 7, domain=tuple(v_stage(3)),
                             step=lambda *a: False)
    with pytest.raises(BudgetError):
        etr_solve(inst)


def test_future_slice_read_is_refused():
    def nosy(x, alpha, view, _param):
        return view(alpha, x)

    inst = RecursionInstance(length=2, domain=(EMPTY,), step=nosy)
    with pytest.raises(ForcelabError):
        etr_solve(inst)


def test_formula_driven_step():
    base = FiniteStructure(v_stage(3), {"A": [EMPTY]})
    step = formula_step(base, atom_in_class(var("x"), "A"), length=3)
    inst = RecursionInstance(length=3, domain=tuple(v_stage(3)), step=step,
                             label="formula-constant")
    sol = etr_solve(inst)
    assert all(s == frozenset([EMPTY]) for s in sol.slices)


def test_monotone_instances_grow():
    domain = tuple(v_stage(3))

    def step(x, alpha, view, _param):
        if hf_rank(x) == 0:
            return True
        return any(view(beta, x) for beta in range(alpha)) or hf_rank(x) <= alpha

    inst = RecursionInstance(length=4, domain=domain, step=step, label="monotone")
    sol = etr_solve(inst)
    for earlier, later in zip(sol.slices, sol.slices[1:]):
        assert earlier <= later
