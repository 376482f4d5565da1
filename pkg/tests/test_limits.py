"""Limit planes, transversality, convergence checks and regularity fits."""

import math

import numpy as np
import pytest

import helpers
from gapcert.domination import certify
from gapcert.errors import (
    InsufficientSampleError,
    MembershipError,
    NoConvergenceError,
    NoGapError,
    NonTransverseSeedError,
    NotCertifiedError,
)
from gapcert.limits import (
    cartan_check,
    cauchy_constant,
    discontinuity_probe,
    holder_estimate,
    pair_in_subset,
    point_in_forward_set,
    sdp_check,
    transversality_table,
    xi_lower,
    xi_upper,
)
from gapcert.linalg import (
    Representation,
    Subspace,
    evaluate,
    grassmann_distance,
    u_k,
)
from gapcert.subsets import AxisFamily, Directed, gamma_p_plus, hat
from gapcert.words import (
    Letter,
    parse_boundary_point,
    parse_word,
    periodic_point,
    translate,
)

LOG8 = math.log(8.0)
A = Letter(1, 1)
B = Letter(2, 1)


def z_rep():
    return Representation.of([np.diag([4.0, 0.5, 0.5])])


def z_axis():
    return AxisFamily(1, (parse_word("a"),))


def example_56_rep():
    return Representation.of(
        [np.diag([2.0, 0.5]), np.array([[0.0, 1.0], [-1.0, 0.0]])]
    )


def schottky_rep():
    rot = np.array(
        [
            [math.cos(math.pi / 4), -math.sin(math.pi / 4)],
            [math.sin(math.pi / 4), math.cos(math.pi / 4)],
        ]
    )
    stretch = np.diag([5.0, 0.2])
    return Representation.of([stretch, rot @ stretch @ rot.T])


def a_axis_f2():
    return AxisFamily(2, (parse_word("a"),))


def directed_ab():
    return Directed(2, frozenset({A, B}))


def span(*columns):
    return Subspace.from_spanning(np.array(columns, dtype=float).T)


E1_3 = span([1.0, 0.0, 0.0])
E23 = span([0.0, 1.0, 0.0], [0.0, 0.0, 1.0])
E1_2 = span([1.0, 0.0])
E2_2 = span([0.0, 1.0])


# ---------------------------------------------------------------------------
# membership predicates


def test_point_membership():
    axis = a_axis_f2()
    assert point_in_forward_set(axis, periodic_point(parse_word("a")))
    assert point_in_forward_set(axis, parse_boundary_point("bb|(a)"))
    assert not point_in_forward_set(axis, periodic_point(parse_word("b")))
    assert not point_in_forward_set(axis, periodic_point(parse_word("A")))
    directed = directed_ab()
    assert point_in_forward_set(directed, parse_boundary_point("B|(ab)"))
    assert not point_in_forward_set(directed, parse_boundary_point("(aB)"))


def test_pair_membership_axis():
    axis = AxisFamily(2, (parse_word("ab"),))
    x, y = periodic_point(parse_word("ab")), periodic_point(parse_word("BA"))
    assert pair_in_subset(axis, x, y)
    g = parse_word("ba")
    assert pair_in_subset(axis, translate(g, x), translate(g, y))
    # endpoints of different parallel-looking lines are not a subset pair
    assert not pair_in_subset(axis, x, periodic_point(parse_word("AB")))
    # a detoured forward endpoint breaks the pure periodicity of the pair
    assert not pair_in_subset(axis, parse_boundary_point("b|(ab)"), y)
    assert not pair_in_subset(axis, x, x)


def test_pair_membership_directed():
    directed = directed_ab()
    assert pair_in_subset(
        directed, periodic_point(parse_word("ab")), periodic_point(parse_word("BA"))
    )
    # directed lines may switch step letters across the junction
    assert pair_in_subset(
        directed, periodic_point(parse_word("a")), periodic_point(parse_word("B"))
    )
    assert not pair_in_subset(
        directed, periodic_point(parse_word("a")), periodic_point(parse_word("b"))
    )


# ---------------------------------------------------------------------------
# limit map values


def test_xi_rank_one_exact():
    rep, axis = z_rep(), z_axis()
    up = xi_upper(rep, axis, 1, periodic_point(parse_word("a")))
    assert grassmann_distance(up.subspace, E1_3) < 1e-12
    assert up.last_step <= 1e-10
    assert up.subspace.dimension == 1
    assert up.cauchy_bound >= 0.0
    down = xi_lower(rep, axis, 1, periodic_point(parse_word("A")))
    assert down.subspace.dimension == 2
    assert grassmann_distance(down.subspace, E23) < 1e-12


def test_xi_lower_is_xi_upper_on_flipped_subset():
    rep, axis = z_rep(), z_axis()
    y = periodic_point(parse_word("A"))
    via_lower = xi_lower(rep, axis, 1, y)
    via_upper = xi_upper(rep, hat(axis), 2, y)
    assert np.array_equal(via_lower.subspace.frame, via_upper.subspace.frame)
    assert via_lower.iterations == via_upper.iterations


def test_xi_detour_family_values():
    rep, axis = example_56_rep(), a_axis_f2()
    cert = certify(rep, axis, 1, 8)
    base = xi_upper(rep, axis, 1, periodic_point(parse_word("a")), certificate=cert)
    assert grassmann_distance(base.subspace, E1_2) < 1e-12
    for m in (1, 2, 3, 5):
        x = parse_boundary_point("a" * m + "b|(a)")
        value = xi_upper(rep, axis, 1, x, certificate=cert)
        assert grassmann_distance(value.subspace, E2_2) < 1e-8
        # the prefix ending exactly at the rotation letter has no gap
        assert 2 * m + 1 in value.skipped_prefixes


def test_xi_membership_and_certificate_gates():
    rep, axis = example_56_rep(), a_axis_f2()
    with pytest.raises(MembershipError):
        xi_upper(rep, axis, 1, periodic_point(parse_word("b")))
    with pytest.raises(MembershipError):
        xi_lower(z_rep(), z_axis(), 1, periodic_point(parse_word("a")))
    identity_rep = Representation.of([np.eye(2), np.eye(2)])
    with pytest.raises(NotCertifiedError):
        xi_upper(identity_rep, a_axis_f2(), 1, periodic_point(parse_word("a")))


def test_xi_no_usable_gap_reports_prefix():
    rep, axis = example_56_rep(), a_axis_f2()
    # rotations never develop a gap; bypass membership to exercise the error
    with pytest.raises(NoGapError) as err:
        xi_upper(
            rep, axis, 1, periodic_point(parse_word("b")),
            n_max=20, assume_member=True,
        )
    assert "b" in str(err.value)


def test_xi_refuses_premature_convergence():
    rep, axis = z_rep(), z_axis()
    with pytest.raises(NoConvergenceError) as err:
        xi_upper(rep, axis, 1, periodic_point(parse_word("a")), n_max=3)
    assert "tail bound" in str(err.value)


def test_xi_periodic_points_match_eigenspace_oracle():
    rep, directed = schottky_rep(), directed_ab()
    cert = certify(rep, directed, 1, 8)
    for text in ("a", "b", "ab", "ba", "aab", "abb", "aabb"):
        w = parse_word(text)
        value = xi_upper(rep, directed, 1, periodic_point(w), certificate=cert)
        oracle = helpers.top_eigenspace(evaluate(rep, w).matrix(), 1)
        assert grassmann_distance(value.subspace, Subspace(1, oracle)) < 1e-6


def test_xi_equivariance():
    rep, directed = schottky_rep(), directed_ab()
    cert = certify(rep, directed, 1, 8)
    points = [periodic_point(parse_word(t)) for t in ("a", "ab", "ba", "aab")]
    for g_text in ("a", "B", "ab", "bA", "aba"):
        g = parse_word(g_text)
        rho_g = evaluate(rep, g).core
        for x in points:
            moved = xi_upper(rep, directed, 1, translate(g, x), certificate=cert)
            pushed = Subspace.from_spanning(
                rho_g
                @ xi_upper(rep, directed, 1, x, certificate=cert).subspace.frame
            )
            assert grassmann_distance(moved.subspace, pushed) < 1e-8


def test_xi_cauchy_rate_invariant():
    rep, directed = schottky_rep(), directed_ab()
    cert = certify(rep, directed, 1, 8)
    prefactor = cauchy_constant(rep, cert)
    x = periodic_point(parse_word("ab"))
    planes = {}
    current = None
    for n in range(1, 13):
        word = x.prefix(n)
        matrix = evaluate(rep, word)
        planes[n] = u_k(matrix, 1)
    for n in range(1, 12):
        step = grassmann_distance(planes[n], planes[n + 1])
        bound = prefactor * math.exp(-cert.lambda_hat * n)
        assert step <= bound * (1.0 + 1e-6) + 1e-15


# ---------------------------------------------------------------------------
# transversality


def test_transversality_diagonal_pairs():
    table = transversality_table(
        z_rep(),
        z_axis(),
        1,
        [(periodic_point(parse_word("a")), periodic_point(parse_word("A")))],
    )
    assert table.minimum == pytest.approx(1.0, abs=1e-12)

    table56 = transversality_table(
        example_56_rep(),
        a_axis_f2(),
        1,
        [(periodic_point(parse_word("a")), periodic_point(parse_word("A")))],
    )
    assert table56.minimum == pytest.approx(1.0, abs=1e-12)


def test_transversality_schottky_sample():
    rep, directed = schottky_rep(), directed_ab()
    pairs = []
    seen = set()
    for w in gamma_p_plus(directed, 5).words():
        x = periodic_point(w)
        y = periodic_point(w.inverse())
        if (x, y) in seen:
            continue
        seen.add((x, y))
        pairs.append((x, y))
        if len(pairs) == 20:
            break
    assert len(pairs) == 20
    table = transversality_table(rep, directed, 1, pairs)
    assert len(table.gaps) == 20
    assert table.minimum == min(table.gaps)
    assert all(g > 0.05 for g in table.gaps)


def test_transversality_rejects_non_member_pair():
    with pytest.raises(MembershipError):
        transversality_table(
            example_56_rep(),
            a_axis_f2(),
            1,
            [(periodic_point(parse_word("a")), periodic_point(parse_word("B")))],
        )


# ---------------------------------------------------------------------------
# seed-plane convergence


def test_sdp_rank_one_closed_form():
    rep, axis = z_rep(), z_axis()
    x, y = periodic_point(parse_word("a")), periodic_point(parse_word("A"))
    seed = span([1.0, 1.0, 0.0])
    curve = sdp_check(rep, axis, 1, x, y, seed, n_points=16)
    assert curve.passed and curve.final < 1e-8
    for n in range(1, 13):
        moved = np.diag([4.0**n, 0.5**n, 0.5**n]) @ np.array([1.0, 1.0, 0.0])
        oracle = grassmann_distance(
            Subspace.from_spanning(moved.reshape(3, 1)), E1_3
        )
        assert curve.distances[n - 1] == pytest.approx(oracle, abs=1e-12)
        closed_form = 8.0**-n / math.sqrt(1.0 + 64.0**-n)
        assert curve.distances[n - 1] == pytest.approx(closed_form, rel=1e-9)


def test_sdp_nontransverse_seed_rejected():
    rep, axis = z_rep(), z_axis()
    x, y = periodic_point(parse_word("a")), periodic_point(parse_word("A"))
    with pytest.raises(NonTransverseSeedError):
        sdp_check(rep, axis, 1, x, y, span([0.0, 1.0, 0.0]))


def test_sdp_detour_representation():
    rep, axis = example_56_rep(), a_axis_f2()
    x, y = periodic_point(parse_word("a")), periodic_point(parse_word("A"))
    curve = sdp_check(rep, axis, 1, x, y, span([1.0, 1.0]), n_points=20)
    assert curve.passed and curve.final < 1e-8
    for n in range(1, 13):
        moved = np.diag([2.0**n, 0.5**n]) @ np.array([1.0, 1.0])
        oracle = grassmann_distance(
            Subspace.from_spanning(moved.reshape(2, 1)), E1_2
        )
        assert curve.distances[n - 1] == pytest.approx(oracle, abs=1e-12)


def test_sdp_demands_schedule_when_line_misses_identity():
    rep, axis = example_56_rep(), a_axis_f2()
    g = parse_word("b")
    x = translate(g, periodic_point(parse_word("a")))
    y = translate(g, periodic_point(parse_word("A")))
    seed = span([1.0, 1.0])
    with pytest.raises(MembershipError):
        sdp_check(rep, axis, 1, x, y, seed)
    schedule = [x.prefix(n) for n in range(1, 21)]
    curve = sdp_check(rep, axis, 1, x, y, seed, schedule=schedule)
    assert curve.passed


# ---------------------------------------------------------------------------
# attraction along verified positive words


def test_cartan_identically_zero_on_axis_powers():
    rep, axis = example_56_rep(), a_axis_f2()
    words = [parse_word("a" * n) for n in range(1, 9)]
    curve = cartan_check(rep, axis, 1, periodic_point(parse_word("a")), words)
    assert curve.passed
    assert all(d == pytest.approx(0.0, abs=1e-12) for d in curve.distances)


def test_cartan_refuses_unwitnessed_detours():
    rep, axis = example_56_rep(), a_axis_f2()
    words = [parse_word("a" * n + "b") for n in range(2, 6)]
    x = periodic_point(parse_word("a"))
    for b in (0, 2):
        with pytest.raises(MembershipError):
            cartan_check(rep, axis, 1, x, words, b=b)


def test_cartan_accepts_shifted_words():
    rep, axis = example_56_rep(), a_axis_f2()
    words = [parse_word("B" + "a" * n) for n in range(1, 7)]
    x = parse_boundary_point("B|(a)")
    with pytest.raises(MembershipError):
        cartan_check(rep, axis, 1, x, words, b=0)
    curve = cartan_check(rep, axis, 1, x, words, b=1)
    assert curve.passed and curve.final < 1e-8


def test_cartan_decays_on_schottky_prefixes():
    rep, directed = schottky_rep(), directed_ab()
    x = periodic_point(parse_word("ab"))
    words = [x.prefix(n) for n in range(1, 11)]
    curve = cartan_check(rep, directed, 1, x, words)
    assert curve.passed
    assert curve.distances[-1] < curve.distances[0]


# ---------------------------------------------------------------------------
# regularity estimate


def test_holder_schottky_positive_exponent():
    rep, directed = schottky_rep(), directed_ab()
    fit = holder_estimate(rep, directed, 1, b=0, kappa=1.0, sample_size=200, seed=7)
    assert fit.alpha_hat > 0.0
    assert fit.r_squared >= 0.8
    assert fit.pairs_used >= 10
    again = holder_estimate(rep, directed, 1, b=0, kappa=1.0, sample_size=200, seed=7)
    assert again.alpha_hat == fit.alpha_hat and again.pairs_used == fit.pairs_used


def test_holder_insufficient_samples():
    with pytest.raises(InsufficientSampleError):
        holder_estimate(z_rep(), z_axis(), 1)
    wide = AxisFamily(2, (parse_word("a"), parse_word("b")))
    # the only periodic endpoints sit at unit visual distance: no small scales
    with pytest.raises(InsufficientSampleError):
        holder_estimate(schottky_rep(), wide, 1, cert_budget=6)


# ---------------------------------------------------------------------------
# discontinuity probe


def test_discontinuity_probe_separates():
    probe = discontinuity_probe(example_56_rep(), exponents=range(1, 11))
    assert probe.separated
    for i, m in enumerate(probe.exponents):
        assert probe.visual[i] == pytest.approx(math.exp(-m), abs=0.0)
        assert probe.separations[i] == pytest.approx(1.0, abs=1e-12)
    assert probe.exponents[2] == 3 and probe.visual[2] == pytest.approx(math.exp(-3))


def test_discontinuity_probe_collapses_with_trivial_detour():
    rep = Representation.of([np.diag([2.0, 0.5]), np.eye(2)])
    probe = discontinuity_probe(rep, exponents=range(1, 8))
    assert not probe.separated
    assert all(s < 1e-10 for s in probe.separations)


def test_discontinuity_probe_needs_two_generators():
    with pytest.raises(ValueError):
        discontinuity_probe(z_rep())
