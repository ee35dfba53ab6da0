"""Clustering planner, slab baseline and the power feasibility loop."""

import numpy as np
import pytest

from uavcover import (
    Bounds3,
    Building,
    IndoorUser,
    InfeasiblePlanError,
    MultiUavConfig,
    audit_plan,
    cluster_power,
    generate_split_users,
    kmeans,
    plan_clustered,
    plan_uniform_split,
)
from uavcover.propagation import rate_power_watts
from uavcover.scenario import make_linear_total_loss, positions_array

BUILDING = Building(20, 50, 100)

# Small roster with a power budget tight enough that the scan must grow k;
# light PSO settings keep the scan fast.
TIGHT = MultiUavConfig(noise_watts=1e-10, pso_population=15, pso_iterations=40, kmeans_seed=1)


def tight_roster(seed=2, n=30):
    return generate_split_users(BUILDING, n, n, 75.0, seed=seed)


class TestKmeans:
    def test_k_equals_roster_size(self):
        users = tight_roster(n=5)
        centroids, labels = kmeans(users, len(users), seed=0)
        assert sorted(labels) == list(range(len(users)))
        points = positions_array(users)
        for j, label in enumerate(labels):
            assert np.allclose(points[j], centroids[label])

    def test_two_blobs_recovered(self):
        rng = np.random.default_rng(0)
        blob_a = rng.normal((5, 5, 5), 0.5, (20, 3))
        blob_b = rng.normal((50, 50, 50), 0.5, (20, 3))
        points = np.vstack([blob_a, blob_b])
        _, labels = kmeans(points, 2, seed=1)
        assert len(set(labels[:20])) == 1
        assert len(set(labels[20:])) == 1
        assert labels[0] != labels[20]

    def test_objective_non_increasing_per_iteration(self):
        # instrumented Lloyd run with the same rules as its own oracle
        points = positions_array(tight_roster(seed=9))
        k = 4
        rng = np.random.default_rng(7)
        centroids = points[rng.choice(len(points), size=k, replace=False)].copy()
        labels = np.full(len(points), -1)
        wcss = []
        for _ in range(100):
            d2 = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
            new_labels = np.argmin(d2, axis=1)
            wcss.append(float(d2[np.arange(len(points)), new_labels].sum()))
            if np.array_equal(new_labels, labels):
                break
            labels = new_labels
            for j in range(k):
                members = points[labels == j]
                if len(members):
                    centroids[j] = members.mean(axis=0)
                else:
                    centroids[j] = points[int(np.argmax(((points - centroids[j]) ** 2).sum(axis=1)))]
        assert all(b <= a + 1e-9 for a, b in zip(wcss, wcss[1:]))
        # and the library run from the same seed reaches the same labels
        _, lib_labels = kmeans(points, k, seed=7)
        assert np.array_equal(lib_labels, labels)

    def test_fixed_point_property(self):
        points = positions_array(tight_roster(seed=4))
        centroids, labels = kmeans(points, 3, seed=3)
        d2 = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        assert np.array_equal(np.argmin(d2, axis=1), labels)
        for j in range(3):
            members = points[labels == j]
            assert len(members) > 0
            assert np.allclose(centroids[j], members.mean(axis=0))

    def test_k_bounds(self):
        users = tight_roster(n=3)
        with pytest.raises(ValueError):
            kmeans(users, len(users) + 1, seed=0)
        with pytest.raises(ValueError):
            kmeans(users, 0, seed=0)

    def test_deterministic(self):
        points = positions_array(tight_roster(seed=5))
        _, a = kmeans(points, 4, seed=11)
        _, b = kmeans(points, 4, seed=11)
        assert np.array_equal(a, b)

    def test_duplicate_points_terminate(self):
        points = np.array([[1.0, 1, 1]] * 5 + [[30.0, 30, 30]])
        _, labels = kmeans(points, 3, seed=2)
        assert len(labels) == 6


class TestClusterPower:
    def test_empty_cluster_is_zero(self):
        assert cluster_power([], (25, 25, 50), BUILDING, MultiUavConfig(), 400) == 0.0

    def test_matches_per_user_formula(self):
        config = MultiUavConfig()
        members = tight_roster(n=4)
        placement = (25.0, 25.0, 50.0)
        linear = make_linear_total_loss(members, config.radio_params(), BUILDING)(placement)
        expected = rate_power_watts(0.0, config.rate_exponent(len(members), 400), config.noise_w) * linear
        assert cluster_power(members, placement, BUILDING, config, 400) == pytest.approx(
            expected, rel=1e-12
        )

    def test_doubling_members_doubles_power(self):
        config = MultiUavConfig()
        members = tight_roster(n=3)
        placement = (25.0, 25.0, 50.0)
        one = cluster_power(members, placement, BUILDING, config, 400)
        two = cluster_power(members + members, placement, BUILDING, config, 400)
        assert two == pytest.approx(2 * one, rel=1e-12)

    def test_per_cluster_exponent_switch(self):
        members = tight_roster(n=4)
        placement = (25.0, 25.0, 50.0)
        full = MultiUavConfig()
        per_cluster = MultiUavConfig(rate_exponent_per_cluster=True)
        p_full = cluster_power(members, placement, BUILDING, full, 400)
        p_cluster = cluster_power(members, placement, BUILDING, per_cluster, 400)
        assert p_cluster < p_full  # 8 users' exponent instead of 400

    def test_placement_outside_bounds_rejected(self):
        with pytest.raises(ValueError):
            cluster_power(tight_roster(n=2), (10.0, 25.0, 50.0), BUILDING, MultiUavConfig(), 400)

    def test_noise_watts_override(self):
        assert MultiUavConfig().noise_w == pytest.approx(1e-18)
        assert MultiUavConfig(noise_watts=2.5e-16).noise_w == 2.5e-16


class TestPlanClustered:
    def test_tight_budget_plan(self):
        users = tight_roster()
        plan = plan_clustered(users, BUILDING, TIGHT)
        assert plan.feasible
        assert plan.k == 4
        assert audit_plan(plan, users, TIGHT) == []
        assert all(p <= TIGHT.max_power_w for p in plan.powers)

    def test_returned_k_is_minimal_among_tested(self):
        users = tight_roster()
        plan = plan_clustered(users, BUILDING, TIGHT)
        from dataclasses import replace

        with pytest.raises(InfeasiblePlanError):
            plan_clustered(users, BUILDING, replace(TIGHT, max_k=plan.k - 1))

    def test_single_user_keeps_two_slots(self):
        users = [IndoorUser(0, (10.0, 25.0, 50.0))]
        generous = MultiUavConfig(pso_population=5, pso_iterations=10)
        plan = plan_clustered(users, BUILDING, generous)
        assert plan.k == 2
        assert sum(p is not None for p in plan.placements) == 1
        assert plan.assignment == {0: 0}

    def test_infeasibility_carries_power_profile(self):
        users = tight_roster()
        from dataclasses import replace

        with pytest.raises(InfeasiblePlanError) as info:
            plan_clustered(users, BUILDING, replace(TIGHT, max_k=2))
        assert len(info.value.powers) == 2
        assert max(info.value.powers) > TIGHT.max_power_w

    def test_deterministic(self):
        users = tight_roster()
        a = plan_clustered(users, BUILDING, TIGHT)
        b = plan_clustered(users, BUILDING, TIGHT)
        assert a.assignment == b.assignment
        assert a.powers == b.powers
        assert [p.position for p in a.placements if p] == [p.position for p in b.placements if p]

    def test_empty_roster_rejected(self):
        with pytest.raises(ValueError):
            plan_clustered([], BUILDING, TIGHT)


class TestPlanUniformSplit:
    def test_baseline_needs_more_uavs_than_clustering(self):
        users = tight_roster()
        clustered = plan_clustered(users, BUILDING, TIGHT)
        uniform = plan_uniform_split(users, BUILDING, TIGHT)
        assert uniform.feasible
        assert uniform.k >= clustered.k
        assert audit_plan(uniform, users, TIGHT) == []

    def test_single_slab_roster_skips_empty_slabs(self):
        # all users in the bottom quarter: at k=2 the top slab is empty
        users = generate_split_users(BUILDING, 8, 0, split_z=25.0, seed=3)
        generous = MultiUavConfig(pso_population=5, pso_iterations=10, kmeans_seed=0)
        plan = plan_uniform_split(users, BUILDING, generous)
        assert plan.k == 2
        assert plan.placements[1] is None
        assert plan.powers[1] == 0.0
        assert audit_plan(plan, users, generous) == []

    def test_assignment_follows_altitude(self):
        users = tight_roster()
        plan = plan_uniform_split(users, BUILDING, TIGHT)
        slab = BUILDING.z_b / plan.k
        for user in users:
            expected = min(int(user.position[2] / slab), plan.k - 1)
            assert plan.assignment[user.id] == expected


class TestAudit:
    def test_detects_power_violation(self):
        users = tight_roster()
        plan = plan_clustered(users, BUILDING, TIGHT)
        plan.powers[0] = TIGHT.max_power_w + 1.0
        assert any("exceeds" in p for p in audit_plan(plan, users, TIGHT))

    def test_detects_missing_user(self):
        users = tight_roster()
        plan = plan_clustered(users, BUILDING, TIGHT)
        del plan.assignment[users[0].id]
        assert any("cover" in p for p in audit_plan(plan, users, TIGHT))

    def test_detects_out_of_bounds_placement(self):
        users = tight_roster()
        plan = plan_clustered(users, BUILDING, TIGHT)
        slot = next(j for j, p in enumerate(plan.placements) if p is not None)
        plan.placements[slot].position = (5.0, 25.0, 50.0)
        assert any("bounds" in p for p in audit_plan(plan, users, TIGHT))
