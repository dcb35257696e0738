import json
import math

import numpy as np
import pytest

from mreg import (
    EvalReport,
    Image,
    RidgeConfig,
    evaluate_identity,
    evaluate_layer,
    pixel_metrics,
    train_expression_layer,
)
from mreg.synthetic import make_smile_task

from conftest import random_dataset, random_image


class TestPixelMetrics:
    def test_constant_offset_hand_values(self):
        # |a - b| = 0.5 everywhere: mae 0.5, mse 0.25,
        # psnr = 10 log10(1 / 0.25) = 20 log10 2 ~ 6.0206 dB.
        a = Image(np.zeros((1, 4, 4)))
        b = Image(np.full((1, 4, 4), 0.5))
        mae, mse, psnr = pixel_metrics(a, b)
        assert mae == 0.5
        assert mse == 0.25
        assert abs(psnr - 20.0 * math.log10(2.0)) <= 1e-12

    def test_identical_images_give_infinite_psnr(self, rng):
        img = random_image(rng)
        mae, mse, psnr = pixel_metrics(img, img)
        assert mae == 0.0
        assert mse == 0.0
        assert psnr == math.inf

    def test_symmetry(self, rng):
        a, b = random_image(rng), random_image(rng)
        assert pixel_metrics(a, b) == pixel_metrics(b, a)

    def test_geometry_mismatch_rejected(self, rng):
        with pytest.raises(ValueError, match="geometry"):
            pixel_metrics(random_image(rng, 4, 4), random_image(rng, 4, 5))

    def test_worst_case_psnr_is_zero_db(self):
        a = Image(np.zeros((1, 2, 2)))
        b = Image(np.ones((1, 2, 2)))
        _, mse, psnr = pixel_metrics(a, b)
        assert mse == 1.0
        assert psnr == 0.0


class TestEvalReport:
    def _per_image(self):
        return (
            {"name": "a", "mae": 0.1, "mse": 0.01, "psnr_db": 20.0},
            {"name": "b", "mae": 0.3, "mse": 0.03, "psnr_db": 10.0},
        )

    def test_aggregate_must_be_the_mean(self):
        with pytest.raises(ValueError, match="aggregate"):
            EvalReport(
                task="t",
                per_image=self._per_image(),
                aggregate={"mae": 0.99, "mse": 0.02, "psnr_db": 15.0},
            )

    def test_valid_aggregate_accepted(self):
        report = EvalReport(
            task="t",
            per_image=self._per_image(),
            aggregate={"mae": 0.2, "mse": 0.02, "psnr_db": 15.0},
        )
        assert report.aggregate["mae"] == 0.2

    def test_external_scores_reserved_as_none(self):
        report = EvalReport(
            task="t",
            per_image=self._per_image(),
            aggregate={"mae": 0.2, "mse": 0.02, "psnr_db": 15.0},
        )
        assert report.external_scores == {"ecs": None, "fss": None, "rs": None, "fid": None}

    def test_json_round_trip_with_infinite_psnr(self, tmp_path):
        per = (
            {"name": "a", "mae": 0.0, "mse": 0.0, "psnr_db": math.inf},
            {"name": "b", "mae": 0.2, "mse": 0.04, "psnr_db": 10.0},
        )
        report = EvalReport(
            task="t",
            per_image=per,
            aggregate={"mae": 0.1, "mse": 0.02, "psnr_db": math.inf},
        )
        path = tmp_path / "report.json"
        report.write_json(path)
        data = json.loads(path.read_text())
        assert data["per_image"][0]["psnr_db"] is None
        assert data["aggregate"]["psnr_db"] is None
        assert data["per_image"][1]["psnr_db"] == 10.0


class TestEvaluate:
    def test_identity_baseline_scores_the_copy(self, rng):
        ds = random_dataset(rng, n=3, h=4, w=4)
        report = evaluate_identity(ds)
        mae, mse, _ = pixel_metrics(ds.pairs[0][0], ds.pairs[0][1])
        assert report.per_image[0]["mae"] == mae
        assert report.per_image[0]["mse"] == mse
        assert report.model_hash is None

    def test_layer_evaluation_names_and_hash(self, rng):
        ds = random_dataset(rng, n=3, h=4, w=4)
        layer = train_expression_layer(ds, RidgeConfig(r=3, lambda_reg=1.0))
        report = evaluate_layer(layer, ds, model_hash="abc123")
        assert report.task == ds.task_name
        assert report.model_hash == "abc123"
        assert tuple(e["name"] for e in report.per_image) == ds.names

    def test_trained_layer_beats_identity_on_smile_task(self):
        ds = make_smile_task(n_pairs=16, size=12, seed=4)
        layer = train_expression_layer(ds, RidgeConfig(r=3, lambda_reg=1.0))
        trained = evaluate_layer(layer, ds)
        identity = evaluate_identity(ds)
        assert trained.aggregate["mae"] * 3 < identity.aggregate["mae"]
        assert trained.aggregate["psnr_db"] > identity.aggregate["psnr_db"]
