import json
import os

import numpy as np
import pytest

from paretolab import bench, campaign
from paretolab.errors import (
    CampaignFormatError,
    InvalidArgument,
    NotFound,
    UnsupportedVersion,
)


class TestGrid:
    def test_default_grid_size(self):
        points = campaign.build_grid(campaign.GridConfig())
        # C(9+2, 2) = 55 compositions x 5 speeds x 5 dilutions
        assert len(points) == 55 * 5 * 5 == 1375

    def test_small_grid_size(self, small_grid_config):
        points = campaign.build_grid(small_grid_config)
        assert len(points) == 10 * 3 * 3 == 90

    def test_ids_are_positional(self, small_grid_config):
        points = campaign.build_grid(small_grid_config)
        assert [p.id for p in points] == list(range(len(points)))

    def test_compositions_on_simplex(self):
        for p in campaign.build_grid(campaign.GridConfig()):
            assert p.c_pvp10 + p.c_pvp40 + p.c_pvp360 == pytest.approx(1.0, abs=1e-9)
            assert min(p.c_pvp10, p.c_pvp40, p.c_pvp360) >= 0.0

    def test_normalized_matrix_in_unit_cube(self, small_grid_config):
        points = campaign.build_grid(small_grid_config)
        X = campaign.normalized_design_matrix(points, small_grid_config)
        assert X.shape == (len(points), 5)
        assert X.min() >= 0.0 and X.max() <= 1.0
        # level-rank normalization: 3 distinct speed levels map to 0, 1/2, 1
        assert set(np.unique(X[:, 3])) == {0.0, 0.5, 1.0}

    def test_invalid_grid_config(self):
        with pytest.raises(InvalidArgument):
            campaign.GridConfig(simplex_denominator=0)
        with pytest.raises(InvalidArgument):
            campaign.GridConfig(speeds=())


class TestIngest:
    def test_round_trip(self, small_campaign):
        m = campaign.Measurement(point_id=7, hardness=3.0, inverse_elasticity=2.0)
        campaign.ingest(small_campaign, m)
        assert small_campaign.measurements[7] is m
        assert small_campaign.audit[-1]["action"] == "ingest"

    def test_unknown_point(self, small_campaign):
        with pytest.raises(NotFound):
            campaign.ingest(
                small_campaign,
                campaign.Measurement(point_id=10_000, hardness=1.0, inverse_elasticity=1.0),
            )

    def test_replacement_is_audited(self, small_campaign):
        campaign.ingest(
            small_campaign,
            campaign.Measurement(point_id=3, hardness=1.0, inverse_elasticity=1.0),
        )
        campaign.ingest(
            small_campaign,
            campaign.Measurement(point_id=3, hardness=2.0, inverse_elasticity=2.0),
        )
        assert small_campaign.measurements[3].hardness == 2.0
        assert [a["action"] for a in small_campaign.audit] == ["ingest", "replace"]

    def test_rejects_nonpositive_values(self):
        with pytest.raises(InvalidArgument):
            campaign.Measurement(point_id=0, hardness=-1.0, inverse_elasticity=1.0)
        with pytest.raises(InvalidArgument):
            campaign.Measurement(point_id=0, hardness=1.0, inverse_elasticity=float("nan"))

    def test_csv_import(self, small_campaign):
        text = "point_id,hardness,inverse_elasticity,note\n1,3.5,2.5,first\n2,4.0,1.5,\n"
        out = campaign.import_measurements_csv(small_campaign, text)
        assert [m.point_id for m in out] == [1, 2]
        assert small_campaign.measurements[1].note == "first"

    def test_csv_import_bad_header(self, small_campaign):
        with pytest.raises(InvalidArgument):
            campaign.import_measurements_csv(small_campaign, "id,h,e\n1,2,3\n")


class TestStep:
    def test_requires_measurements(self, small_campaign):
        with pytest.raises(InvalidArgument):
            campaign.step(small_campaign)

    def test_step_advances_iteration_and_logs(self, seeded_small_campaign):
        st = seeded_small_campaign
        artifacts = campaign.step(st, compute_report=False, compute_embedding=False)
        assert st.iteration == 1
        assert st.low is not None and st.classes is not None
        assert len(artifacts.suggestions) == st.batch_size
        assert st.log[-1]["event"] == "step"
        assert st.log[-1]["suggestions"] == [p.id for p in artifacts.suggestions]

    def test_step_deterministic_without_new_data(self, small_grid_config):
        results = []
        for _ in range(2):
            st = campaign.new_campaign(small_grid_config, seed=0, epsilon=0.1)
            st.burn_in = 6
            rng = np.random.default_rng(0)
            for pid in rng.choice(st.n_points, 8, replace=False):
                h, ie = bench.surrogate_spincoat(st.points[pid], seed=5)
                campaign.ingest(
                    st,
                    campaign.Measurement(
                        point_id=int(pid), hardness=h, inverse_elasticity=ie
                    ),
                )
            art = campaign.step(st, compute_report=False, compute_embedding=False)
            results.append((st.means.copy(), [p.id for p in art.suggestions]))
        assert np.array_equal(results[0][0], results[1][0])
        assert results[0][1] == results[1][1]

    def test_counts_partition(self, seeded_small_campaign):
        st = seeded_small_campaign
        campaign.step(st, compute_report=False, compute_embedding=False)
        assert sum(st.counts().values()) == st.n_points

    def test_burn_in_suppresses_classification(self, seeded_small_campaign):
        st = seeded_small_campaign
        st.burn_in = 100  # more than the 8 ingested measurements
        campaign.step(st, compute_report=False, compute_embedding=False)
        assert st.counts()["undecided"] == st.n_points

    def test_step_report_and_embedding(self, seeded_small_campaign):
        st = seeded_small_campaign
        artifacts = campaign.step(st, compute_report=True, compute_embedding=True)
        assert artifacts.report is not None and artifacts.report.markdown
        assert artifacts.embedding.shape == (st.n_points, 2)
        # embedding is computed once and cached on the state
        again = campaign.step(st, compute_report=False, compute_embedding=True)
        assert np.array_equal(artifacts.embedding, again.embedding)


class TestSuggest:
    def test_batch_is_distinct_unsampled(self, seeded_small_campaign):
        st = seeded_small_campaign
        art = campaign.step(st, compute_report=False, compute_embedding=False)
        ids = [p.id for p in art.suggestions]
        assert len(set(ids)) == len(ids) == st.batch_size
        assert not set(ids) & set(st.measurements)

    def test_batch_size_one(self, seeded_small_campaign):
        st = seeded_small_campaign
        campaign.step(st, compute_report=False, compute_embedding=False)
        assert len(campaign.suggest_batch(st, 1)) == 1

    def test_invalid_batch_size(self, seeded_small_campaign):
        with pytest.raises(InvalidArgument):
            campaign.suggest_batch(seeded_small_campaign, 0)

    def test_empty_before_first_step(self, small_campaign):
        assert campaign.suggest_batch(small_campaign, 3) == []

    def test_empty_after_convergence(self, seeded_small_campaign):
        st = seeded_small_campaign
        campaign.step(st, compute_report=False, compute_embedding=False)
        st.classes = np.full(st.n_points, 2, dtype=np.int8)
        assert campaign.suggest_batch(st, 3) == []


class TestOverride:
    def test_override_is_logged_and_first_in_batch(self, seeded_small_campaign):
        st = seeded_small_campaign
        campaign.step(st, compute_report=False, compute_embedding=False)
        target = next(i for i in range(st.n_points) if i not in st.measurements)
        campaign.record_override(st, target)
        assert st.log[-1] == {
            "event": "override",
            "iteration": st.iteration,
            "point_id": target,
        }
        batch = campaign.suggest_batch(st, 3)
        assert batch[0].id == target

    def test_override_cleared_on_ingest(self, seeded_small_campaign):
        st = seeded_small_campaign
        target = next(i for i in range(st.n_points) if i not in st.measurements)
        campaign.record_override(st, target)
        h, ie = bench.surrogate_spincoat(st.points[target], seed=5)
        campaign.ingest(
            st, campaign.Measurement(point_id=target, hardness=h, inverse_elasticity=ie)
        )
        assert target not in st.pending_overrides

    def test_override_already_sampled(self, seeded_small_campaign):
        st = seeded_small_campaign
        sampled = next(iter(st.measurements))
        with pytest.raises(InvalidArgument):
            campaign.record_override(st, sampled)

    def test_override_unknown_point(self, seeded_small_campaign):
        with pytest.raises(NotFound):
            campaign.record_override(seeded_small_campaign, 10_000)


class TestExplain:
    def test_requires_a_step(self, small_campaign):
        with pytest.raises(InvalidArgument):
            campaign.explain(small_campaign)

    def test_statements_and_report(self, seeded_small_campaign):
        st = seeded_small_campaign
        campaign.step(st, compute_report=False, compute_embedding=False)
        statements, report = campaign.explain(st, threshold=0.5)
        assert statements
        assert all(s.truth >= 0.5 for s in statements)
        assert report.markdown.strip()


class TestPersistence:
    def test_round_trip_identity(self, seeded_small_campaign):
        st = seeded_small_campaign
        campaign.step(st, compute_report=True, compute_embedding=True)
        text = campaign.save(st)
        st2 = campaign.load(text)
        assert campaign.save(st2) == text
        assert np.array_equal(st.classes, st2.classes)
        assert np.array_equal(st.means, st2.means)
        assert np.array_equal(st.embedding, st2.embedding)
        assert st.measurements.keys() == st2.measurements.keys()
        assert st2.grid_config == st.grid_config

    def test_truncated_document(self, small_campaign):
        text = campaign.save(small_campaign)
        with pytest.raises(CampaignFormatError):
            campaign.load(text[: len(text) // 2])

    def test_future_version_rejected(self, small_campaign):
        doc = json.loads(campaign.save(small_campaign))
        doc["format_version"] = campaign.FORMAT_VERSION + 1
        with pytest.raises(UnsupportedVersion):
            campaign.load(json.dumps(doc))

    def test_missing_field_rejected(self, small_campaign):
        doc = json.loads(campaign.save(small_campaign))
        del doc["grid_config"]
        with pytest.raises(CampaignFormatError):
            campaign.load(json.dumps(doc))

    def test_atomic_file_write(self, small_campaign, tmp_path):
        path = tmp_path / "campaign.json"
        campaign.save_to_file(small_campaign, str(path))
        loaded = campaign.load_from_file(str(path))
        assert loaded.n_points == small_campaign.n_points
        # no leftover temp files after a successful write
        assert os.listdir(tmp_path) == ["campaign.json"]

    def test_load_missing_file(self, tmp_path):
        with pytest.raises(NotFound):
            campaign.load_from_file(str(tmp_path / "nope.json"))

    def test_log_survives_round_trip(self, seeded_small_campaign):
        st = seeded_small_campaign
        campaign.step(st, compute_report=False, compute_embedding=False)
        n_log = len(st.log)
        st2 = campaign.load(campaign.save(st))
        assert len(st2.log) == n_log
        assert st2.log == st.log


class TestRunCampaign:
    def test_small_surrogate_run_converges(self, small_grid_config):
        st = campaign.new_campaign(small_grid_config, seed=0, epsilon=0.1)
        st.burn_in = 9
        campaign.run_campaign(
            st,
            lambda p: bench.surrogate_spincoat(p, seed=100),
            max_evaluations=60,
            n_initial=3,
        )
        assert st.converged
        assert len(st.measurements) <= 60
        assert st.counts()["pareto"] >= 1
