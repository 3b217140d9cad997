import copy
import json
import os
import tempfile
import unittest
from unittest.mock import patch

import numpy as np

import packages.sdk.src as Shaper

PRESET = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "demo", "res",
                      "two_user_8pam_sweep.json")

MINIMAL = {
    "room": {
        "leds": [[1.0, 1.0, 3.0], [-1.0, -1.0, 3.0]],
        "users": [[0.5, 0.5, 0.5], [-0.5, -0.5, 0.5]],
    },
    "modulation": {"order": 4},
    "noise": {"a_over_sigma_db": [40, 50]},
}


class TestConfigService(unittest.TestCase):

    def tearDown(self):
        Shaper.init()

    def test_defaults(self):
        Shaper.init()
        self.assertEqual(Shaper.Mixture.GridPolicy.from_config(), Shaper.Mixture.GridPolicy(16, 8.0))
        self.assertEqual(Shaper.ConfigService.get("component_cap"), 2 ** 20)

    def test_set_get_and_unset(self):
        Shaper.ConfigService.set({"custom": 3})
        self.assertTrue(Shaper.ConfigService.is_set("custom"))
        self.assertEqual(Shaper.ConfigService.get("custom"), 3)
        Shaper.ConfigService.unset("custom")
        with self.assertRaises(Shaper.Errors.ConfigNotSetError):
            Shaper.ConfigService.get("custom")
        self.assertEqual(Shaper.ConfigService.get("custom", 7), 7)

    def test_init_resets_previous_overrides(self):
        Shaper.init({"points_per_sigma": 32})
        self.assertEqual(Shaper.Mixture.GridPolicy.from_config().points_per_sigma, 32)
        Shaper.init()
        self.assertEqual(Shaper.Mixture.GridPolicy.from_config().points_per_sigma, 16)

    def test_init_rejects_bad_values(self):
        for configs in ({"threads": 0}, {"component_cap": 2.5}, {"points_per_sigma": 2},
                        {"grid_margin_sigmas": 3.0}):
            with self.assertRaises(Shaper.Errors.InvalidInputError):
                Shaper.init(configs)

    def test_threads_from_environment(self):
        with patch.dict(os.environ, {"VLC_SHAPER_THREADS": "3"}):
            Shaper.init()
            self.assertEqual(Shaper.worker_count(), 3)
        with patch.dict(os.environ, {"VLC_SHAPER_THREADS": "many"}):
            with self.assertRaises(Shaper.Errors.InvalidInputError):
                Shaper.init()


class TestSchema(unittest.TestCase):

    def test_minimal_document_is_valid(self):
        Shaper.Schema.schema.verify_object_against_schema(MINIMAL)

    def test_missing_room(self):
        doc = {k: v for k, v in MINIMAL.items() if k != "room"}
        with self.assertRaises(Shaper.Errors.ConfigValidationError) as ctx:
            Shaper.Schema.schema.verify_object_against_schema(doc)
        self.assertEqual(ctx.exception.path, "room")

    def test_unknown_key_is_named(self):
        doc = {**MINIMAL, "roooms": {}}
        with self.assertRaises(Shaper.Errors.ConfigValidationError) as ctx:
            Shaper.Schema.schema.verify_object_against_schema(doc)
        self.assertEqual(ctx.exception.path, "roooms")

    def test_nested_path(self):
        doc = copy.deepcopy(MINIMAL)
        doc["room"]["users"][1] = [0.5, 0.5]
        messages = []
        with self.assertRaises(Shaper.Errors.ConfigValidationError) as ctx:
            Shaper.Schema.schema.verify_object_against_schema(doc, messages=messages)
        self.assertEqual(ctx.exception.path, "room.users[1]")
        self.assertIn("room.users[1]", str(ctx.exception))
        self.assertEqual(len(messages), 1)

    def test_format_path(self):
        self.assertEqual(Shaper.Schema.schema.format_path(["room", "users", 1]), "room.users[1]")
        self.assertEqual(Shaper.Schema.schema.format_path([]), "")


class TestExperimentConfig(unittest.TestCase):

    def test_defaults_are_filled(self):
        cfg = Shaper.ExperimentConfig.config_from_dict(MINIMAL)
        self.assertEqual(cfg.users, 2)
        self.assertEqual(cfg.methods, ("zf_ao",))
        self.assertEqual(cfg.db_convention, "amplitude")
        self.assertEqual(cfg.fa.population, 100)
        self.assertEqual(cfg.ao.outer_iters, 20)
        self.assertEqual(cfg.channel().shape, (2, 2))
        self.assertTrue(cfg.fa.binned_search)

    def test_exact_firefly_search(self):
        cfg = Shaper.ExperimentConfig.config_from_dict({**MINIMAL, "firefly": {"binned_search": False}})
        self.assertFalse(cfg.fa.binned_search)

    def test_position_outside_room(self):
        doc = copy.deepcopy(MINIMAL)
        doc["room"]["users"][1] = [4.0, 0.0, 0.5]
        with self.assertRaises(Shaper.Errors.ConfigValidationError) as ctx:
            Shaper.ExperimentConfig.config_from_dict(doc)
        self.assertEqual(ctx.exception.path, "room.users[1]")

    def test_non_unit_normal(self):
        doc = copy.deepcopy(MINIMAL)
        doc["room"]["pd_normal"] = [0.0, 0.0, 2.0]
        with self.assertRaises(Shaper.Errors.ConfigValidationError) as ctx:
            Shaper.ExperimentConfig.config_from_dict(doc)
        self.assertEqual(ctx.exception.path, "room.pd_normal")

    def test_load_preset(self):
        cfg = Shaper.ExperimentConfig.load_config(PRESET)
        self.assertEqual(cfg.users, 2)
        self.assertEqual(cfg.order, 8)
        self.assertEqual(cfg.db_convention, "power")
        self.assertEqual(cfg.methods, ("zf_ao", "uniform_baseline_zf"))
        self.assertEqual(cfg.seed, 2024)
        np.testing.assert_allclose(cfg.user_positions, [[1.25, -1.6, 0.5], [-2.25, -0.33, 0.5]])

    def test_invalid_json(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "broken.json")
            with open(path, "w", encoding="utf-8") as f:
                f.write('{"room": ')
            with self.assertRaises(Shaper.Errors.ConfigValidationError):
                Shaper.ExperimentConfig.load_config(path)

    def test_overrides_ignore_none(self):
        cfg = Shaper.ExperimentConfig.config_from_dict(MINIMAL)
        changed = cfg.with_overrides(seed=9, methods=None)
        self.assertEqual(changed.seed, 9)
        self.assertEqual(changed.methods, cfg.methods)

    def test_operating_point(self):
        cfg = Shaper.ExperimentConfig.config_from_dict({**MINIMAL, "noise": {"a_over_sigma_db": [20]}})
        constellations, noise = cfg.operating_point(20)
        self.assertAlmostEqual(constellations[0].peak, 10.0)
        self.assertEqual(noise.sigma, 1.0)
        noise_cfg = cfg.with_overrides(peak_policy="sweep_noise")
        constellations, noise = noise_cfg.operating_point(20)
        self.assertEqual(constellations[0].peak, 1.0)
        self.assertAlmostEqual(noise.sigma, 0.1)

    def test_ratio_from_db(self):
        self.assertAlmostEqual(Shaper.ExperimentConfig.ratio_from_db(60), 1e3)
        self.assertAlmostEqual(Shaper.ExperimentConfig.ratio_from_db(60, "power"), 1e6)
        with self.assertRaises(Shaper.Errors.InvalidInputError):
            Shaper.ExperimentConfig.ratio_from_db(60, "decibel")


if __name__ == "__main__":
    unittest.main()
