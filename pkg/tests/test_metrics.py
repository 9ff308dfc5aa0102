"""Quality measures and the brute-force oracle."""

import itertools

import numpy as np
import pytest

from mpxmbo import (
    DetectConfig,
    MultiplexNetwork,
    Partition,
    balanced_tv_objective,
    compute_degrees,
    detect,
    evaluate,
    matched_accuracy,
    multiplex_modularity,
    multiplex_modularity_sumform,
    nmi,
    oracle_max_modularity,
)
from mpxmbo import _kernels

from conftest import (
    dense_modularity_value,
    florentine_best_assignment,
    random_gamma,
    random_network,
    random_partition,
)


def P(labels, n_c=None):
    labels = np.asarray(labels, dtype=np.int64)
    return Partition(labels, n_c or int(labels.max()))


# ---------------------------------------------------------------- modularity


def test_single_community_single_layer_is_zero(two_triangles):
    net, deg = two_triangles
    q = multiplex_modularity(P(np.ones(6, dtype=int)), net, deg, 1.0)
    assert q == 0.0


def test_two_triangles_component_partition(two_triangles):
    net, deg = two_triangles
    q = multiplex_modularity(P([1, 1, 1, 2, 2, 2]), net, deg, 1.0)
    assert q == 0.5


def test_florentine_reference_values(florentine):
    net, deg = florentine
    gamma = 0.6
    best = florentine_best_assignment()
    q_best = multiplex_modularity(P(best), net, deg, gamma)
    assert q_best == pytest.approx(70.84 / 104.0, abs=1e-12)
    assert round(q_best, 3) == 0.681
    competitor = best.copy()
    competitor[2] = 2
    competitor[17 + 2] = 2  # third family joins the bloc in both layers
    q_comp = multiplex_modularity(P(competitor), net, deg, gamma)
    assert q_comp == pytest.approx(70.0 / 104.0, abs=1e-14)
    assert round(q_comp, 3) == 0.673
    assert q_best > q_comp


def test_single_pair_network_literal_formula():
    net = MultiplexNetwork.from_dense_layers([np.array([[2.0]])], omega=0.0)
    deg = compute_degrees(net)
    gamma = 1.7
    # one node, one layer: Q = (A11 - gamma d^2 / 2m) / 2mu with d = 2m = A11
    a11 = 2.0
    expected = (a11 - gamma * a11 * a11 / a11) / a11
    got = multiplex_modularity(P([1]), net, deg, gamma)
    assert got == pytest.approx(expected, abs=1e-15)
    assert multiplex_modularity_sumform(P([1]), net, deg, gamma) == pytest.approx(
        expected, abs=1e-15
    )


def test_grouped_sum_and_dense_trace_agree():
    rng = np.random.default_rng(61)
    for _ in range(60):
        net = random_network(rng)
        deg = compute_degrees(net)
        if deg.total_strength <= 0:
            continue
        gamma = random_gamma(rng, net.L)
        part = random_partition(rng, net.nL, int(rng.integers(2, 5)))
        q1 = multiplex_modularity(part, net, deg, gamma)
        q2 = multiplex_modularity_sumform(part, net, deg, gamma)
        q3 = dense_modularity_value(part, net, gamma)
        assert abs(q1 - q2) <= 1e-10
        assert abs(q1 - q3) <= 1e-10


def test_modularity_relabel_invariant(florentine):
    net, deg = florentine
    rng = np.random.default_rng(8)
    part = random_partition(rng, net.nL, 4)
    perm = np.array([3, 1, 4, 2])
    relabeled = Partition(perm[part.assignment - 1], 4)
    q1 = multiplex_modularity(part, net, deg, 0.6)
    q2 = multiplex_modularity(relabeled, net, deg, 0.6)
    assert q1 == q2


def test_modularity_zero_strength_error():
    net = MultiplexNetwork.from_dense_layers([np.zeros((2, 2))], omega=0.0)
    deg = compute_degrees(net)
    with pytest.raises(ValueError, match="total strength"):
        multiplex_modularity(P([1, 1]), net, deg, 1.0)
    with pytest.raises(ValueError, match="total strength"):
        multiplex_modularity_sumform(P([1, 1]), net, deg, 1.0)
    with pytest.raises(ValueError):
        balanced_tv_objective(P([1, 1]), net, deg, 1.0)


def test_modularity_size_mismatch(florentine):
    net, deg = florentine
    with pytest.raises(ValueError, match="size"):
        multiplex_modularity(P([1, 2]), net, deg, 1.0)


# ------------------------------------------------------------- tv / balance


def test_all_one_partition_has_no_cut(florentine):
    net, deg = florentine
    tv, balance = balanced_tv_objective(P(np.ones(net.nL, dtype=int)), net, deg, 0.6)
    assert tv == 0.0
    assert balance > 0.0


def test_two_triangles_objective_hand_values(two_triangles):
    net, deg = two_triangles
    tv, balance = balanced_tv_objective(P([1, 1, 1, 2, 2, 2]), net, deg, 1.0)
    assert tv == 0.0
    assert balance == 6.0  # 2 * 36 / 12
    assert deg.total_strength == 12.0
    q = multiplex_modularity(P([1, 1, 1, 2, 2, 2]), net, deg, 1.0)
    assert q == 1.0 - (tv + balance) / deg.total_strength


def test_equivalence_identity_randomized():
    rng = np.random.default_rng(62)
    checked = 0
    while checked < 60:
        net = random_network(rng)
        deg = compute_degrees(net)
        if deg.total_strength <= 0:
            continue
        gamma = random_gamma(rng, net.L)
        part = random_partition(rng, net.nL, int(rng.integers(2, 5)))
        q = multiplex_modularity(part, net, deg, gamma)
        tv, balance = balanced_tv_objective(part, net, deg, gamma)
        assert abs(q - (1.0 - (tv + balance) / deg.total_strength)) <= 1e-10
        checked += 1


# ----------------------------------------------------------------------- nmi


def test_nmi_identity_and_relabeling():
    a = P([1, 1, 2, 2, 3])
    assert nmi(a, a) == 1.0
    assert nmi(P([1, 1, 2, 2]), P([2, 2, 1, 1])) == 1.0
    assert nmi(P([1, 2, 1, 2]), P([3, 1, 3, 1], 3)) == 1.0


def test_nmi_independent_labelings_are_zero():
    assert nmi(P([1, 1, 2, 2]), P([1, 2, 1, 2])) == 0.0


def test_nmi_symmetric_and_bounded():
    rng = np.random.default_rng(63)
    for _ in range(30):
        size = int(rng.integers(2, 40))
        a = random_partition(rng, size, int(rng.integers(2, 5)))
        b = random_partition(rng, size, int(rng.integers(2, 5)))
        v = nmi(a, b)
        assert v == nmi(b, a)
        assert 0.0 <= v <= 1.0


def test_nmi_hand_value():
    a = P([1, 1, 2, 2])
    b = P([1, 1, 1, 2])
    # literal formula: counts [[2,0],[1,1]], n=4
    mi = 0.5 * np.log(2 * 4 / (2 * 3)) + 0.25 * np.log(4 / (2 * 3)) + 0.25 * np.log(4 / 2)
    ha = np.log(2.0)
    hb = -(0.75 * np.log(0.75) + 0.25 * np.log(0.25))
    assert nmi(a, b) == pytest.approx(mi / np.sqrt(ha * hb), abs=1e-12)


def test_nmi_zero_entropy_rules():
    flat = P([1, 1, 1], 2)  # one non-empty community, extra empty label
    split = P([1, 2, 1])
    assert nmi(flat, split) == 0.0
    assert nmi(split, flat) == 0.0
    assert nmi(flat, P([2, 2, 2], 2)) == 1.0


def test_nmi_permutation_of_pairs_invariant():
    rng = np.random.default_rng(64)
    a = random_partition(rng, 30, 3)
    b = random_partition(rng, 30, 4)
    perm = rng.permutation(30)
    va = nmi(a, b)
    vb = nmi(Partition(a.assignment[perm], 3), Partition(b.assignment[perm], 4))
    assert va == pytest.approx(vb, abs=1e-15)


def test_nmi_length_mismatch():
    with pytest.raises(ValueError):
        nmi(P([1, 2]), P([1, 2, 1]))


# ------------------------------------------------------------------ accuracy


def test_accuracy_identity():
    rng = np.random.default_rng(65)
    part = random_partition(rng, 25, 4)
    acc, matching = matched_accuracy(part, part)
    assert acc == 1.0
    present = {int(lab) for lab in part.assignment}
    assert matching == {lab: lab for lab in present}


def test_accuracy_worked_example():
    acc, matching = matched_accuracy(P([1, 1, 2, 3]), P([1, 1, 2, 2]))
    assert acc == 0.75
    assert matching == {1: 1, 2: 2}  # size tie 2 vs 3 broken by label; 3 left unmatched


def test_accuracy_majority_match():
    acc, _ = matched_accuracy(P([1, 1, 1, 1], 2), P([1, 1, 2, 2]))
    assert acc == 0.5


def test_accuracy_relabeling_truth_invariant():
    det = P([1, 1, 2, 3])
    acc1, _ = matched_accuracy(det, P([1, 1, 2, 2]))
    acc2, _ = matched_accuracy(det, P([2, 2, 1, 1]))
    assert acc1 == acc2 == 0.75


def test_accuracy_detected_relabeling_same_sizes():
    # swapping two equal-sized detected communities keeps the score
    det1 = P([1, 1, 2, 2, 3])
    det2 = P([2, 2, 1, 1, 3])
    truth = P([1, 1, 2, 2, 2])
    acc1, _ = matched_accuracy(det1, truth)
    acc2, _ = matched_accuracy(det2, truth)
    assert acc1 == acc2


def test_accuracy_length_mismatch():
    with pytest.raises(ValueError):
        matched_accuracy(P([1, 2]), P([1, 2, 1]))


# -------------------------------------------------------------------- oracle


def test_oracle_two_triangles(two_triangles):
    net, deg = two_triangles
    q_max, part = oracle_max_modularity(net, deg, 1.0, 2)
    assert q_max == 0.5
    lab = part.assignment
    assert len(set(lab[:3])) == 1 and len(set(lab[3:])) == 1 and lab[0] != lab[3]


def test_oracle_single_community_shortcut(two_triangles):
    net, deg = two_triangles
    q, part = oracle_max_modularity(net, deg, 1.0, 1)
    assert q == multiplex_modularity(P(np.ones(6, dtype=int)), net, deg, 1.0)
    assert part.n_c == 1


def test_oracle_degenerate_and_oversized():
    empty = MultiplexNetwork.from_dense_layers([np.zeros((2, 2))], omega=0.0)
    with pytest.raises(ValueError, match="strength"):
        oracle_max_modularity(empty, compute_degrees(empty), 1.0, 2)
    rng = np.random.default_rng(66)
    net = random_network(rng, n_max=10, l_max=3)
    deg = compute_degrees(net)
    with pytest.raises(ValueError, match="too large"):
        oracle_max_modularity(net, deg, 1.0, 2, limit=4)


def test_oracle_matches_full_enumeration():
    # canonical-label pruning must not change the maximum
    rng = np.random.default_rng(67)
    for _ in range(5):
        net = random_network(rng, n_max=4, l_max=2)
        deg = compute_degrees(net)
        if deg.total_strength <= 0:
            continue
        gamma = random_gamma(rng, net.L)
        q_oracle, _ = oracle_max_modularity(net, deg, gamma, 2)
        brute = max(
            multiplex_modularity(Partition(np.array(lab, dtype=np.int64), 2), net, deg, gamma)
            for lab in itertools.product((1, 2), repeat=net.nL)
        )
        assert q_oracle == pytest.approx(brute, abs=1e-14)


def test_oracle_dominates_detect():
    rng = np.random.default_rng(68)
    done = 0
    while done < 8:
        net = random_network(rng, n_max=5, l_max=2)
        deg = compute_degrees(net)
        if deg.total_strength <= 0 or net.nL > 10 or net.nL < 4:
            continue
        gamma = float(rng.uniform(0.5, 1.5))
        q_max, _ = oracle_max_modularity(net, deg, gamma, 2)
        cfg = DetectConfig(
            method="dgfm3", n_c=2, k=min(3, net.nL - 1), gamma=gamma,
            omega=net.omega, n_runs=6, seed=done,
        )
        res = detect(net, deg, cfg)
        assert res.best.modularity <= q_max + 1e-12
        done += 1


def test_enumeration_kernels_agree():
    rng = np.random.default_rng(69)
    for n_c in (2, 3):
        s = rng.standard_normal((6, 6))
        s = s + s.T
        best_jit = _kernels.enumerate_partitions(s, n_c)
        best_np = _kernels.enumerate_partitions_numpy(s, n_c)
        assert best_jit[0] == pytest.approx(best_np[0], abs=1e-12)
        assert np.array_equal(best_jit[1], best_np[1])


def test_label_edge_sum_kernels_agree(florentine):
    net, _ = florentine
    rng = np.random.default_rng(70)
    lab = rng.integers(1, 4, size=net.n).astype(np.int64)
    a = net.intra[0]
    assert _kernels.label_edge_sums(a.rows, a.cols, a.data, lab) == pytest.approx(
        _kernels.label_edge_sums_numpy(a.rows, a.cols, a.data, lab)
    )


# ------------------------------------------------------------------ evaluate


def test_evaluate_without_truth(florentine):
    net, deg = florentine
    part = P(florentine_best_assignment())
    report = evaluate(part, net, deg, 0.6)
    assert report.modularity == pytest.approx(70.84 / 104.0, abs=1e-12)
    assert report.n_communities_detected == 3
    assert report.accuracy is None and report.nmi is None and report.matching is None


def test_evaluate_with_truth(florentine):
    net, deg = florentine
    part = P(florentine_best_assignment())
    report = evaluate(part, net, deg, 0.6, truth=part)
    assert report.accuracy == 1.0
    assert report.nmi == 1.0
    assert report.matching == {1: 1, 2: 2, 3: 3}
