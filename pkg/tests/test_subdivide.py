"""Star and excluded barycentric subdivisions and the Γ / Θ fans."""

from fractions import Fraction
from math import factorial

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from toricchow.errors import PreconditionFailed
from toricchow.fan import (
    Cone,
    Fan,
    affine_space,
    divisor_fan,
    is_complete,
    is_subdivision,
    make_fan,
    projective_line_power,
    quotient_fan,
    unit,
)
from toricchow.subdivide import (
    HalfspaceSpec,
    SubfanSelection,
    build_gamma,
    build_theta,
    count_t_admissible,
    cylinder_rays,
    cylinder_subdivision,
    demo_dist14,
    excluded_barycentric,
    is_I_rigid,
    lift_subdivision_along_ray,
    rigidity_halfspace_check,
    sd_operator,
    star_sequence_subdivision,
    star_subdivision,
    t_admissible_permutations,
    theta_by_restriction,
)

E3 = [unit(3, i) for i in (1, 2, 3)]


def cone(*rays):
    return Cone(rays)


def prefix(n, k):
    return Cone([unit(n, i) for i in range(1, k + 1)], n, check=False)


def example_cones():
    e1, e2, e3 = E3
    return {
        cone(e1, e2, (1, 1, 1)),
        cone(e1, (1, 0, 1), (1, 1, 1)),
        cone(e2, (0, 1, 1), (1, 1, 1)),
        cone(e3, (1, 0, 1), (1, 1, 1)),
        cone(e3, (0, 1, 1), (1, 1, 1)),
    }


def test_star_subdivisions():
    A2 = affine_space(2)
    fine, _ = star_subdivision(A2, Cone([(1, 0), (0, 1)]))
    assert set(fine.maximal_cones) == {cone((1, 0), (1, 1)), cone((1, 1), (0, 1))}
    P2 = projective_line_power(2)
    fine, _ = star_subdivision(P2, Cone([(-1, 0), (0, 1)]))
    assert len(fine.maximal_cones) == 4 - 1 + 2 and is_complete(fine)
    fine, _ = star_subdivision(affine_space(3), Cone(E3))
    assert len(fine.maximal_cones) == 3
    assert all((1, 1, 1) in c.rayset for c in fine.maximal_cones)


def test_t_admissible_permutations():
    assert t_admissible_permutations(2, 3) == [(1, 2, 3), (1, 3, 2), (2, 3, 1), (3, 1, 2), (3, 2, 1)]
    for m in range(5):
        assert t_admissible_permutations(m, m) == [tuple(range(1, m + 1))]
    assert sorted(t_admissible_permutations(0, 2)) == [(1, 2), (2, 1)]
    for m in range(5):
        assert count_t_admissible(0, m) == factorial(m)
        for t in range(m + 1):
            assert count_t_admissible(t, m) == len(t_admissible_permutations(t, m))


def test_excluded_barycentric_of_the_cube_corner():
    A3 = affine_space(3)
    res = excluded_barycentric(A3, prefix(3, 2))
    assert set(res.fan.maximal_cones) == example_cones()
    assert sorted(p.alpha for p in res.pieces) == t_admissible_permutations(2, 3)


def test_excluded_barycentric_degenerate_cases():
    A3 = affine_space(3)
    assert excluded_barycentric(A3, prefix(3, 3)).fan == A3
    A2 = affine_space(2)
    assert len(excluded_barycentric(A2, Cone.zero(2)).fan.maximal_cones) == 2
    assert excluded_barycentric(A2, Cone.zero(2)).fan == star_sequence_subdivision(A2, Cone.zero(2))


@pytest.mark.parametrize("n", range(0, 4))
def test_closed_form_matches_star_sequence(n):
    fan = affine_space(n)
    for m in range(n + 1):
        sel = SubfanSelection(fan, maximal=[prefix(n, m)])
        for t in range(m + 1):
            closed = excluded_barycentric(fan, prefix(n, t), sel).fan
            assert closed == star_sequence_subdivision(fan, prefix(n, t), sel)
            assert len(closed.maximal_cones) == count_t_admissible(t, m)


def test_sd_operator_examples():
    A3 = affine_space(3)
    eta = prefix(3, 2)
    assert sd_operator(A3, eta, 3, 1) == excluded_barycentric(A3, eta).fan
    rays = set(sd_operator(A3, eta, 2, 2).rays)
    assert {(0, 2, 1), (0, 1, 2), (2, 0, 1), (1, 0, 2)} <= rays
    assert sd_operator(A3, eta, 2, 2, s=0) == A3
    with pytest.raises(ValueError):
        sd_operator(A3, eta, 2, 0)


@pytest.mark.parametrize("n", [2, 3])
def test_sd_cones_are_rigid_on_their_axis_rays(n):
    for t in range(n + 1):
        for u in range(1, n + 1):
            for d in (1, 2):
                fan = sd_operator(affine_space(n), prefix(n, t), u, d)
                for c in fan.maximal_cones:
                    assert is_I_rigid(c, [i for i in range(1, n + 1) if unit(n, i) in c.rayset])


def test_gamma_fans():
    assert len(build_gamma(3, 1).fan.maximal_cones) == 30
    assert len(build_gamma(2, 1).fan.maximal_cones) == 6
    # Γ_{2,1} by hand: the two quadrants with x_1 <= 0 are each cut by the ray through their diagonal
    by_hand = make_fan(
        [
            cone((1, 0), (0, 1)),
            cone((1, 0), (0, -1)),
            cone((-1, 0), (-1, 1)),
            cone((-1, 1), (0, 1)),
            cone((-1, 0), (-1, -1)),
            cone((-1, -1), (0, -1)),
        ],
        2,
    )
    assert build_gamma(2, 1).fan == by_hand


def test_theta_fans():
    for n in range(1, 4):
        for r in range(n + 1):
            assert build_theta(n, r, ()).fan == projective_line_power(n)
    theta2 = build_theta(2, 1, (1,)).fan
    assert divisor_fan(theta2, 2, 1) == build_theta(1, 1, (1,)).fan


@pytest.mark.parametrize("n,r", [(2, 0), (2, 1), (3, 0), (3, 1), (3, 2)])
def test_theta_refines_gamma(n, r):
    theta = build_theta(n, r, (1,)).fan
    assert is_subdivision(theta, build_gamma(n, r).fan)
    assert theta_by_restriction(n, r, (1,)) == theta


@pytest.mark.parametrize("n,r", [(2, 0), (2, 1), (3, 0), (3, 1), (3, 2)])
def test_faces_of_theta_are_smaller_thetas(n, r):
    big, small = build_theta(n, r, (1,)).fan, build_theta(n - 1, r, (1,)).fan
    for i in range(r + 1, n + 1):
        assert divisor_fan(big, i, 1).relabeled() == small


def test_rays_with_vanishing_coordinate_avoid_the_axis():
    fan = build_theta(3, 1, (1,)).fan
    r = 1
    axes = {unit(3, i) for i in range(1, 4)}
    checked = 0
    for a in fan.rays:
        if a in axes or any(a[i] > 0 for i in range(r)):
            continue
        for s in range(r + 1, 4):
            if a[s - 1] == 0:
                checked += 1
                assert not fan.contains([a, unit(3, s)])
    assert checked > 0


def test_rigidity_and_halfspaces():
    e1, e2, e3 = E3
    assert rigidity_halfspace_check(cone(e1, e2, (1, 1, 1)), [1, 2]).is_rigid
    assert not is_I_rigid(cone(e1, e2, (1, 2, 1)), [1, 2])
    H = HalfspaceSpec.standard(1, 2, 3)
    assert rigidity_halfspace_check(Cone([(1, 2)]), [], H).in_halfspace
    assert not HalfspaceSpec.standard(1, 2, 1).holds((1, 2))
    with pytest.raises(PreconditionFailed):
        rigidity_halfspace_check(Cone([(-1, 2)]), [], H)


def test_cones_over_the_excluded_ray_stay_in_the_halfspace():
    n, t, d = 3, 1, 2
    eta = prefix(n, t)
    fan = sd_operator(affine_space(n), eta, t + 1, d, s=n - t)
    bound = HalfspaceSpec.standard(t, n, (n - t) ** (n - t) / (d * t))
    over = [c for c in fan.maximal_cones if eta.rayset <= c.rayset]
    assert over
    assert all(rigidity_halfspace_check(c, [1], bound).in_halfspace for c in over)


def test_lift_subdivision_along_ray():
    star, _ = star_subdivision(projective_line_power(2), Cone([(-1, 0), (0, -1)]))
    assert lift_subdivision_along_ray(star, (-1, -1), []) == star
    theta = build_theta(3, 1, (1,)).fan
    alpha = next(a for a in theta.rays if a not in set(E3) and sum(map(abs, a)) > 1)
    V, _ = quotient_fan(theta, Cone([alpha]))
    tau = V.cones(2)[0]
    lifted = lift_subdivision_along_ray(theta, alpha, [tau])
    assert quotient_fan(lifted, Cone([alpha]))[0] == star_subdivision(V, tau)[0]
    assert is_subdivision(lifted, theta)


def worked_example_fan() -> Fan:
    P = projective_line_power(2)
    fan, _ = star_subdivision(P, Cone([(-1, 0), (0, 1)]))
    fan, _ = star_subdivision(fan, Cone([(-1, 0), (0, -1)]))
    return fan


def test_cylinder_subdivision_of_the_worked_example():
    fan = worked_example_fan()
    assert set(cylinder_rays(fan, [2], [1])) == {(-1, 1), (-1, 0), (-1, -1), (0, -1)}
    out = cylinder_subdivision(fan, [2], [1])
    assert is_complete(out) and is_subdivision(out, projective_line_power(3))


def test_cylinder_subdivision_of_a_torus_is_a_line():
    out = cylinder_subdivision(Fan([Cone.zero(0)], 0))
    assert out == projective_line_power(1)


def test_cylinder_subdivision_kills_cones_over_the_new_axis():
    fan = build_theta(2, 1, (1,)).fan
    out = cylinder_subdivision(fan, [2], [1])
    et = unit(3, 3)
    excluded = {unit(3, 1), unit(3, 2)}
    for c in fan.cones():
        lifted = [v + (0,) for v in c.rays]
        if lifted and not set(lifted) & excluded:
            assert not out.contains(lifted + [et])
    bottom = Fan([c for c in out.cones() if all(v[-1] == 0 for v in c.rays)], 3)
    assert bottom == Fan([Cone([v + (0,) for v in c.rays], 3) for c in fan.maximal_cones], 3)


def test_iterates_of_the_linear_recursion():
    it = demo_dist14(20)
    assert it[0] == ((2, 1, 1), (3, 2, 1))
    assert (it[1][0][1], it[1][1][1]) == (3, 4)
    assert all(Fraction(y, x) > Fraction(1, 10) for (x, y, _), _ in it)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 3), st.data())
def test_star_subdivision_is_a_subdivision(n, data):
    fan = projective_line_power(n)
    for _ in range(data.draw(st.integers(1, 3))):
        sigma = data.draw(st.sampled_from([c for c in fan.cones() if c.dim >= 2] or [None]))
        if sigma is None:
            break
        fine, _ = star_subdivision(fan, sigma)
        assert is_subdivision(fine, fan) and is_complete(fine)
        assert len(fine.maximal_cones) == len(fan.maximal_cones) + len(fan.star(sigma)) * (sigma.dim - 1)
        fan = fine
