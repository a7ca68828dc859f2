"""Synthetic data, the local model, and the averaging protocol."""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import holosim.fedlearn as fl

CFG_SMALL = fl.FLConfig(num_clients=3, rounds=2, samples_per_client=30,
                        test_samples=70)


class TestConfig:
    def test_defaults_valid(self):
        cfg = fl.FLConfig()
        assert cfg.layout.param_count == 16 * 32 + 32 + 32 * 7 + 7

    def test_invalid_values_rejected(self):
        with pytest.raises(ValueError):
            fl.FLConfig(num_clients=0)
        with pytest.raises(ValueError):
            fl.FLConfig(learning_rate=-0.1)
        with pytest.raises(ValueError):
            fl.FLConfig(partition="sorted")
        with pytest.raises(ValueError):
            fl.FLConfig(partition="dirichlet", alpha=0.0)
        with pytest.raises(ValueError):
            fl.FLConfig(input_dim=3)  # cannot place 7 class means

    def test_zero_learning_rate_and_zero_rounds_allowed(self):
        fl.FLConfig(learning_rate=0.0)
        fl.FLConfig(rounds=0)

    def test_mean_mode_layout(self):
        cfg = fl.FLConfig(model_kind="mean")
        assert cfg.layout.param_count == 1


class TestSyntheticData:
    def test_shapes_and_counts(self):
        clients, test = fl.gen_synthetic(CFG_SMALL)
        assert len(clients) == 3
        for c in clients:
            assert c.features.shape == (30, 16)
            assert c.n_samples == 30
        assert test.features.shape == (70, 16)
        assert test.client_id == -1

    def test_deterministic(self):
        a, ta = fl.gen_synthetic(CFG_SMALL)
        b, tb = fl.gen_synthetic(CFG_SMALL)
        for ca, cb in zip(a, b):
            assert np.array_equal(ca.features, cb.features)
            assert np.array_equal(ca.labels, cb.labels)
        assert np.array_equal(ta.features, tb.features)

    def test_iid_labels_balanced_per_client(self):
        cfg = fl.FLConfig(num_clients=10, samples_per_client=100)
        clients, _ = fl.gen_synthetic(cfg)
        for c in clients:
            counts = np.bincount(c.labels, minlength=7)
            assert counts.max() - counts.min() <= 1

    def test_test_set_balanced(self):
        _, test = fl.gen_synthetic(fl.FLConfig(test_samples=1400))
        assert np.bincount(test.labels, minlength=7).tolist() == [200] * 7

    def test_dirichlet_skews_labels(self):
        cfg = fl.FLConfig(partition="dirichlet", alpha=0.1, seed=42)
        clients, _ = fl.gen_synthetic(cfg)
        top_fracs = [np.bincount(c.labels, minlength=7).max() / c.n_samples
                     for c in clients]
        assert max(top_fracs) > 0.5

    def test_class_means_separated(self):
        cfg = fl.FLConfig(separation=5.0, samples_per_client=700)
        clients, _ = fl.gen_synthetic(cfg)
        c = clients[0]
        for label in range(7):
            rows = c.features[c.labels == label]
            centroid = rows.mean(axis=0)
            assert centroid[label] == pytest.approx(5.0, abs=0.5)

    def test_dataset_validation(self):
        with pytest.raises(ValueError):
            fl.ClientDataset(0, np.zeros((3, 2)), np.array([0, 1, 9]))
        with pytest.raises(ValueError):
            fl.ClientDataset(0, np.zeros((0, 2)), np.array([], dtype=int))


class TestModelMath:
    def test_init_shapes_and_distribution(self):
        cfg = fl.FLConfig()
        p = fl.init_params(cfg)
        assert p.values.shape == (cfg.layout.param_count,)
        assert p.version == 0
        d, h = cfg.input_dim, cfg.hidden_dim
        w1 = p.values[:d * h]
        b1 = p.values[d * h:d * h + h]
        assert np.all(b1 == 0.0)
        assert np.std(w1) == pytest.approx(1.0 / np.sqrt(d), rel=0.2)

    def test_params_stay_float32_representable(self):
        run = fl.run_fedavg(CFG_SMALL)
        for p in (run.initial_params, run.params, *run.params_history):
            v = p.values
            assert np.array_equal(v, v.astype(np.float32).astype(np.float64))

    def test_loss_is_log_chance_for_uniform_model(self):
        cfg = fl.FLConfig()
        zero = fl.ModelParams(cfg.layout, np.zeros(cfg.layout.param_count))
        _, test = fl.gen_synthetic(fl.FLConfig(test_samples=70))
        val = fl.loss(zero, test.features, test.labels)
        assert val == pytest.approx(np.log(7.0), rel=1e-12)

    def test_gradient_matches_finite_differences(self):
        cfg = fl.FLConfig()
        rng = np.random.default_rng(2024)
        X = rng.normal(size=(40, 16))
        y = rng.integers(0, 7, size=40)
        base = fl.init_params(cfg).values + rng.normal(0, 0.05,
                                                       cfg.layout.param_count)
        g = fl.grad(fl.ModelParams(cfg.layout, base), X, y)
        step = 1e-5
        for i in rng.choice(base.size, size=25, replace=False):
            up, down = base.copy(), base.copy()
            up[i] += step
            down[i] -= step
            fd = (fl.loss(fl.ModelParams(cfg.layout, up), X, y)
                  - fl.loss(fl.ModelParams(cfg.layout, down), X, y)) / (2 * step)
            assert fd == pytest.approx(g[i], rel=1e-6, abs=1e-10)

    def test_mean_mode_closed_form(self):
        cfg = fl.FLConfig(model_kind="mean")
        layout = cfg.layout
        X = np.zeros((4, 1))
        y = np.array([1, 2, 3, 6])
        p = fl.ModelParams(layout, np.array([2.0]))
        assert fl.loss(p, X, y) == pytest.approx(
            0.5 * np.mean((2.0 - y) ** 2))
        assert fl.grad(p, X, y)[0] == pytest.approx(2.0 - y.mean())

    def test_untrained_model_near_chance(self):
        """With no class separation the features carry no label signal, so
        an untrained net sits at 1/7 for any seed."""
        for seed in (42, 1, 7):
            cfg = fl.FLConfig(seed=seed, separation=0.0)
            _, test = fl.gen_synthetic(cfg)
            acc = fl.evaluate(fl.init_params(cfg), test)
            assert acc == pytest.approx(1.0 / 7.0, abs=0.05)

    def test_batch_validation(self):
        cfg = fl.FLConfig()
        p = fl.init_params(cfg)
        with pytest.raises(ValueError):
            fl.loss(p, np.zeros((0, 16)), np.array([], dtype=int))
        with pytest.raises(ValueError):
            fl.grad(p, np.zeros((4, 9)), np.zeros(4, dtype=int))


class TestClientUpdate:
    def test_deterministic_given_same_inputs(self):
        clients, _ = fl.gen_synthetic(CFG_SMALL)
        p = fl.init_params(CFG_SMALL)
        a = fl.client_update(p, clients[0], CFG_SMALL)
        b = fl.client_update(p, clients[0], CFG_SMALL)
        assert np.array_equal(a.params.values, b.params.values)
        assert a.round == 0
        assert a.n_samples == 30

    def test_round_carried_from_global_version(self):
        cfg = fl.FLConfig(num_clients=3, rounds=2, samples_per_client=30,
                          test_samples=70, batch_size=8)
        clients, _ = fl.gen_synthetic(cfg)
        p = fl.init_params(cfg)
        p3 = fl.ModelParams(p.layout, p.values, version=3)
        upd = fl.client_update(p3, clients[0], cfg)
        assert upd.round == 3
        base = fl.client_update(p, clients[0], cfg)
        # a different round shuffles mini-batches differently
        assert not np.array_equal(upd.params.values, base.params.values)

    def test_full_batch_ignores_shuffle_stream(self):
        cfg = fl.FLConfig(num_clients=1, batch_size=10 ** 9,
                          samples_per_client=20, test_samples=70)
        clients, _ = fl.gen_synthetic(cfg)
        p = fl.init_params(cfg)
        a = fl.client_update(p, clients[0], cfg)
        # full-batch descent consumes no randomness, so the round index
        # (which seeds the shuffle) cannot matter
        p9 = fl.ModelParams(p.layout, p.values, version=9)
        b = fl.client_update(p9, clients[0], cfg)
        assert np.array_equal(a.params.values, b.params.values)

    def test_zero_rate_returns_start_params(self):
        cfg = fl.FLConfig(num_clients=1, learning_rate=0.0,
                          samples_per_client=20, test_samples=70)
        clients, _ = fl.gen_synthetic(cfg)
        p = fl.init_params(cfg)
        upd = fl.client_update(p, clients[0], cfg)
        assert np.array_equal(upd.params.values, p.values)

    def test_layout_mismatch_rejected(self):
        clients, _ = fl.gen_synthetic(CFG_SMALL)
        wrong = fl.ModelParams(fl.ModelLayout(16, 8), np.zeros(16 * 8 + 8 + 8 * 7 + 7))
        with pytest.raises(ValueError):
            fl.client_update(wrong, clients[0], CFG_SMALL)


class TestAggregate:
    def layout(self):
        return fl.ModelLayout(1, 0, 1)

    def update(self, cid, value, n, rnd=0):
        return fl.ClientUpdate(cid, fl.ModelParams(self.layout(),
                                                   np.array([value])), n, rnd)

    def test_sample_weighted_mean(self):
        agg = fl.aggregate([self.update(0, 1.0, 10), self.update(1, 4.0, 30)])
        assert agg.values[0] == pytest.approx(0.25 * 1.0 + 0.75 * 4.0)
        assert agg.version == 1

    def test_order_invariant(self):
        ups = [self.update(i, float(i), 10 + i) for i in range(5)]
        a = fl.aggregate(ups)
        b = fl.aggregate(list(reversed(ups)))
        assert np.array_equal(a.values, b.values)

    def test_version_is_round_plus_one(self):
        agg = fl.aggregate([self.update(0, 1.0, 10, rnd=6)])
        assert agg.version == 7

    def test_mismatched_rounds_rejected(self):
        with pytest.raises(ValueError):
            fl.aggregate([self.update(0, 1.0, 10, rnd=0),
                          self.update(1, 1.0, 10, rnd=1)])

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            fl.aggregate([])

    @given(st.lists(st.tuples(st.floats(-100, 100), st.integers(1, 1000)),
                    min_size=1, max_size=8))
    @settings(max_examples=50, deadline=None)
    def test_aggregate_is_convex_combination(self, pairs):
        ups = [self.update(i, v, n) for i, (v, n) in enumerate(pairs)]
        agg = fl.aggregate(ups)
        values = [v for v, _ in pairs]
        lo = np.float32(min(values))
        hi = np.float32(max(values))
        assert lo - 1e-6 <= agg.values[0] <= hi + 1e-6


class TestTrainingRuns:
    def test_zero_rounds_history_empty(self):
        cfg = fl.FLConfig(rounds=0, num_clients=2, samples_per_client=20,
                          test_samples=70)
        run = fl.run_fedavg(cfg)
        assert run.accuracy_history == ()
        assert np.array_equal(run.params.values, run.initial_params.values)

    def test_history_length_and_snapshots(self):
        run = fl.run_fedavg(CFG_SMALL)
        assert len(run.accuracy_history) == 2
        assert len(run.params_history) == 2
        assert run.params_history[-1] is run.params
        assert [p.version for p in run.params_history] == [1, 2]

    def test_single_client_full_batch_matches_centralized_every_round(self):
        cfg = fl.FLConfig(num_clients=1, rounds=6, batch_size=10 ** 9,
                          samples_per_client=40, test_samples=70)
        fed = fl.run_fedavg(cfg)
        cent = fl.run_centralized(cfg)
        for pf, pc in zip(fed.params_history, cent.params_history):
            assert pf.values.tobytes() == pc.values.tobytes()

    def test_accuracy_improves_with_training(self):
        cfg = fl.FLConfig(num_clients=4, rounds=8, samples_per_client=50,
                          test_samples=140)
        run = fl.run_fedavg(cfg)
        untrained = fl.evaluate(run.initial_params, fl.gen_synthetic(cfg)[1])
        assert run.accuracy_history[-1] > untrained + 0.3

    def test_centralized_epochs_scale_with_local_epochs(self):
        cfg = fl.FLConfig(num_clients=2, rounds=3, local_epochs=2,
                          samples_per_client=20, test_samples=70)
        cent = fl.run_centralized(cfg)
        assert len(cent.accuracy_history) == 6


class TestReporting:
    def test_update_size_arithmetic(self):
        assert fl.update_size(1_050_000, 4) == 4_200_000
        assert fl.update_size(0, 4) == 0
        with pytest.raises(ValueError):
            fl.update_size(-1, 4)

    def test_convergence_csv_format(self):
        csv = fl.convergence_csv([0.5, 0.75], [0.6, 0.8])
        lines = csv.strip().splitlines()
        assert lines[0] == "round,federated_acc,centralized_acc"
        assert lines[1] == "1,0.500000,0.600000"
        assert lines[2] == "2,0.750000,0.800000"

    def test_convergence_csv_length_mismatch(self):
        with pytest.raises(ValueError):
            fl.convergence_csv([0.5], [0.6, 0.7])

    def test_convergence_pair_aligns_epochs(self):
        cfg = fl.FLConfig(num_clients=2, rounds=3, local_epochs=2,
                          samples_per_client=20, test_samples=70)
        fed, cent, csv = fl.convergence_pair(cfg)
        assert len(fed.accuracy_history) == 3
        assert len(cent.accuracy_history) == 6
        assert len(csv.strip().splitlines()) == 4
