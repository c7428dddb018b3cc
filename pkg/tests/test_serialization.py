"""Model and description persistence."""

import numpy as np
import pytest

from tmfusion.description import global_description, load_description
from tmfusion.machine import (dumps_model, load_model, loads_model,
                              save_model, train)


class TestModelRoundTrip:
    def test_round_trip_preserves_outputs(self, xor_data, small_params,
                                          tmp_path):
        from tmfusion.machine import batch_classify
        model = train(small_params, xor_data)
        path = tmp_path / "model.json"
        save_model(model, path)
        back = load_model(path)
        rng = np.random.default_rng(0)
        X = rng.integers(0, 2, size=(200, 2)).astype(np.uint8)
        assert batch_classify(model, X) == batch_classify(back, X)

    def test_identical_seeds_are_byte_identical(self, xor_data, small_params):
        a = dumps_model(train(small_params, xor_data))
        b = dumps_model(train(small_params, xor_data))
        assert a == b

    def test_round_trip_is_idempotent_text(self, xor_data, small_params):
        text = dumps_model(train(small_params, xor_data))
        assert dumps_model(loads_model(text)) == text

    def test_rejects_wrong_format_version(self, xor_data, small_params):
        import json
        doc = json.loads(dumps_model(train(small_params, xor_data)))
        doc["format_version"] = 999
        with pytest.raises(ValueError):
            loads_model(json.dumps(doc))


class TestDescriptionRoundTrip:
    def test_round_trip(self, xor_data, small_params, tmp_path):
        g = global_description(train(small_params, xor_data))
        path = tmp_path / "desc.json"
        g.save(path)
        back = load_description(path)
        assert back.records == g.records
        assert back.classes == g.classes
        assert back.num_features == g.num_features

    def test_records_are_canonically_ordered(self, xor_data, small_params):
        g = global_description(train(small_params, xor_data))
        keys = [(g.classes.index(r.class_label), -r.polarity, r.literals,
                 r.weight) for r in g.records]
        assert keys == sorted(keys)
