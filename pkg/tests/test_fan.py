"""Cones, fans, quotients, faces along an axis and standardness."""

from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from toricchow.errors import InvalidCone, InvalidFan, NotAFace, NotPure
from toricchow.fan import (
    Cone,
    Fan,
    affine_space,
    cone_intersection,
    coordinates_in,
    divisor_fan,
    extend_from_region,
    fan_from_json,
    fan_to_json,
    is_complete,
    is_subdivision,
    make_fan,
    product_with_P1,
    projective_line_power,
    quotient_fan,
    restrict_to_region,
    standardness_report,
    unit,
)
from toricchow.subdivide import build_gamma, build_theta, star_subdivision

e1, e2 = (1, 0), (0, 1)


def projective_plane() -> Fan:
    rays = [(1, 0), (0, 1), (-1, -1)]
    return make_fan([Cone([a, b]) for a, b in [(rays[0], rays[1]), (rays[1], rays[2]), (rays[0], rays[2])]], 2)


def test_cone_construction_checks():
    c = Cone([e1, e2])
    assert c.dim == 2 and c.is_smooth
    with pytest.raises(InvalidCone):
        Cone([(2, 0)])
    with pytest.raises(InvalidCone):
        Cone([(1, 0), (2, 1), (3, 1)])
    assert not Cone([(1, 0), (1, 2)]).is_smooth


def test_cone_intersections():
    assert cone_intersection(Cone([e1, e2]), Cone([e1, (0, -1)])) == Cone([e1])
    assert cone_intersection(Cone([(1, 1)]), Cone([e1])) == Cone.zero(2)
    assert cone_intersection(Cone([e1, (1, 2)]), Cone([e2, (1, 2)])) == Cone([(1, 2)])


def _in_cone_by_sampling(cone: Cone, bound: int = 3) -> set:
    pts = set()
    for v in product(range(-bound, bound + 1), repeat=cone.n):
        lam = coordinates_in(cone, v)
        if any(v) and lam is not None and all(x >= 0 for x in lam):
            pts.add(v)
    return pts


def test_cone_intersection_matches_membership_sampling():
    a, b = Cone([e1, (1, 2)]), Cone([e2, (1, 2)])
    meet = cone_intersection(a, b)
    assert _in_cone_by_sampling(a) & _in_cone_by_sampling(b) == _in_cone_by_sampling(meet)


def test_fans_validate_overlaps():
    assert is_complete(make_fan(projective_line_power(2).maximal_cones, 2))
    with pytest.raises(InvalidFan):
        make_fan([Cone([e1, e2]), Cone([(1, 1), (2, -1)])], 2)
    g = make_fan([Cone.zero(0)], 0)
    assert g.maximal_cones == (Cone.zero(0),)


def test_completeness():
    for n in range(1, 4):
        assert is_complete(projective_line_power(n))
        assert not is_complete(affine_space(n))
    assert is_complete(projective_plane())
    with pytest.raises(NotPure):
        is_complete(Fan([Cone([e1, e2]), Cone([(-1, 0)])], 2))


def test_subdivision_checks():
    A2 = affine_space(2)
    assert is_subdivision(star_subdivision(A2, Cone([e1, e2]))[0], A2)
    assert not is_subdivision(A2, projective_line_power(2))
    theta = build_theta(2, 1, (1,)).fan
    assert is_subdivision(theta, projective_line_power(2))
    # every ray of the subdivision lies in a quadrant (independent per-ray check)
    assert all(any(q.contains(r) for q in projective_line_power(2).maximal_cones) for r in theta.rays)


def test_quotient_fans():
    A3 = affine_space(3)
    V, _ = quotient_fan(A3, Cone([(0, 0, 1)]))
    assert V == affine_space(2)
    star, _ = star_subdivision(affine_space(2), Cone([e1, e2]))
    V, images = quotient_fan(star, Cone([(1, 1)]))
    # e1 and e2 map to opposite generators of N / Z(1, 1)
    assert sorted(V.rays) == [(-1,), (1,)]
    assert images[Cone([e1, (1, 1)])] == Cone([(-images[Cone([e2, (1, 1)])].rays[0][0],)])
    P = projective_line_power(2)
    assert quotient_fan(P, Cone.zero(2))[0] == P
    with pytest.raises(NotAFace):
        quotient_fan(A3, Cone([(1, 1, 0)]))


def test_divisor_fans():
    for n in range(2, 4):
        P = projective_line_power(n)
        for i in range(1, n + 1):
            for eps in (0, 1):
                assert divisor_fan(P, i, eps) == projective_line_power(n - 1)
    D = divisor_fan(affine_space(2), 2, 1)
    assert D == affine_space(1)
    assert D.axes == (1,)


def test_product_with_P1():
    assert product_with_P1(Fan([Cone.zero(0)], 0)) == projective_line_power(1)
    assert product_with_P1(projective_line_power(1)) == projective_line_power(2)
    A1xP1 = product_with_P1(affine_space(1))
    assert set(A1xP1.maximal_cones) == {Cone([e1, e2]), Cone([e1, (0, -1)])}


def test_region_restriction():
    P = projective_line_power(2)
    R = restrict_to_region(P, 1)
    assert set(R.maximal_cones) == {Cone([(-1, 0), e2]), Cone([(-1, 0), (0, -1)])}
    assert R.contains(Cone([e2])) and R.contains(Cone([(0, -1)]))
    theta = build_theta(2, 1, (1,)).fan
    assert extend_from_region(restrict_to_region(theta, 1), 1) == theta
    for n, r in [(2, 1), (3, 1), (3, 2)]:
        delta = restrict_to_region(build_theta(n, r, (1,)).fan, r)
        assert restrict_to_region(extend_from_region(delta, r), r) == delta


@pytest.mark.parametrize("n", range(0, 5))
def test_p1_powers_are_very_standard(n):
    for r in range(n + 1):
        assert standardness_report(projective_line_power(n), r).ok


def test_standardness_fails_on_the_starred_cube():
    P = projective_line_power(3)
    S, _ = star_subdivision(P, Cone([(1, 0, 0), (0, 1, 0), (0, 0, -1)]))
    rep = standardness_report(S, 0)
    assert rep.r_standard and not rep.very_r_standard


@pytest.mark.parametrize("n,r", [(1, 0), (1, 1), (2, 0), (2, 1), (2, 2), (3, 0), (3, 1), (3, 2), (3, 3)])
def test_theta_fans_are_very_standard(n, r):
    theta = build_theta(n, r, (1,)).fan
    assert standardness_report(theta, r).ok
    assert standardness_report(build_gamma(n, r).fan, r).r_standard


def test_quotients_of_complete_fans_are_complete():
    theta = build_theta(3, 1, (1,)).fan
    for c in theta.cones():
        V, _ = quotient_fan(theta, c)
        assert V.is_pure and V.n == 3 - c.dim
        assert is_complete(V)


def test_maximal_cones_meet_in_common_faces():
    theta = build_theta(3, 1, (1,)).fan
    cones = theta.maximal_cones
    for a in cones[:40]:
        for b in cones:
            meet = cone_intersection(a, b)
            assert meet == Cone(sorted(a.rayset & b.rayset), 3, check=False)


@settings(max_examples=25, deadline=None)
@given(st.data())
def test_star_subdivision_at_a_two_cone_keeps_standardness(data):
    theta = build_theta(3, 1, (1,)).fan
    r = 1
    eta = {unit(3, 2), unit(3, 3)}
    allowed = [c for c in theta.cones(2) if unit(3, 1) not in c.rayset and not c.rayset <= eta]
    sigma = data.draw(st.sampled_from(allowed))
    fine, _ = star_subdivision(theta, sigma)
    rep = standardness_report(fine, r)
    assert rep.r_standard and rep.very_r_standard


def test_json_round_trip():
    theta = build_theta(2, 1, (1,)).fan
    data = fan_to_json(theta)
    assert data["rank"] == 2
    assert fan_from_json(data) == theta
    with pytest.raises(InvalidFan):
        fan_from_json({"rank": 2, "rays": [[1, 0]], "max_cones": [[0, 3]]})
