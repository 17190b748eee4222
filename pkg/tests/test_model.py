"""
Tests for the model artifact, its derived quantities and model files.

Tests cover:
- eps0 splitting and gamma0 parameterizations
- Structural validation messages
- Coupling matrices and descriptor length
- Binary model files: round trips and every failure kind
"""

import json
import math
import struct

import numpy as np
import pytest

from src.errors import MalformedModelFileError, ModelIOError, ModelValidationError, VersionMismatchError
from src.models import Hyperparameters
from src.network.model import (
    EonModel,
    Gamma0,
    build_a_matrices,
    compute_a_matrices,
    descriptor_length,
    informative_dims,
    split_epsilon0,
    validate,
)
from src.network.persistence import MAGIC, from_bytes, load, save, to_bytes
from src.network.training import loss


class TestGamma0:
    """Test the input-weight payload."""

    def test_split_adds_up(self):
        """Both shares add back to eps0."""
        eps_w, eps_s = split_epsilon0(0.01, 6, 520)
        assert eps_w + eps_s == pytest.approx(0.01)
        assert eps_w == pytest.approx(0.01 * math.log(6) / math.log(6 * 520))

    def test_split_single_cell(self):
        """K0 = T = 1 splits evenly."""
        assert split_epsilon0(0.4, 1, 1) == (0.2, 0.2)

    def test_split_single_feature(self):
        """One feature puts the whole budget on the data points."""
        assert split_epsilon0(0.4, 1, 10) == (0.0, pytest.approx(0.4))

    @pytest.mark.parametrize("mode", ["fixed-uniform", "feature-weights", "rank-1", "full-matrix"])
    def test_training_matrix_has_unit_mass(self, mode):
        """Every parameterization spreads total mass 1 over K0 x T."""
        gamma0 = Gamma0.uniform(mode, 3, 7)
        matrix = gamma0.training_matrix(3, 7)
        assert matrix.shape == (3, 7)
        assert matrix.sum() == pytest.approx(1.0)
        np.testing.assert_allclose(gamma0.feature_weights(3), [1 / 3] * 3)

    def test_uniform_full_matrix_respects_observed(self):
        """Unobserved cells start with zero weight."""
        observed = np.array([[True, False], [True, True]])
        matrix = Gamma0.uniform("full-matrix", 2, 2, observed).matrix
        np.testing.assert_allclose(matrix, [[1 / 3, 0.0], [1 / 3, 1 / 3]])

    def test_unknown_mode(self):
        """Unknown modes are rejected."""
        with pytest.raises(ValueError):
            Gamma0("per-point")

    def test_payload_is_read_only(self):
        """Payload arrays cannot be modified in place."""
        gamma0 = Gamma0("feature-weights", w=np.array([0.5, 0.5]))
        with pytest.raises(ValueError):
            gamma0.w[0] = 1.0


class TestValidate:
    """Test structural validation."""

    def test_random_models_are_valid(self, rng, make_model):
        """The factory produces valid models in every mode."""
        for mode in ("fixed-uniform", "feature-weights", "rank-1", "full-matrix"):
            assert validate(make_model(rng, [2, 3, 4, 2], mode)) == []

    def test_column_sum_violation_names_residual(self, rng, make_model):
        """A perturbed column is reported with its sum."""
        model = make_model(rng, [2, 3, 2])
        theta = np.array(model.theta[0])
        theta[0, 1] += 1e-6
        broken = EonModel(S=model.S, theta=(theta,), gamma0=model.gamma0, hyper=model.hyper, n_train=model.n_train)
        messages = validate(broken)
        assert any("theta[1] column 1" in m and "residual" in m for m in messages)

    def test_non_finite_codebook(self, rng, make_model):
        """NaN codebook entries are reported by position."""
        model = make_model(rng, [2, 3, 2])
        S = np.array(model.S)
        S[1, 2] = np.nan
        broken = EonModel(S=S, theta=model.theta, gamma0=model.gamma0, hyper=model.hyper, n_train=model.n_train)
        assert "S[1,2] is not finite" in validate(broken)

    def test_wrong_shapes(self, rng, make_model):
        """Shape mismatches are reported."""
        model = make_model(rng, [2, 3, 2])
        broken = EonModel(
            S=np.zeros((3, 3)), theta=(np.full((2, 2), 0.5),), gamma0=model.gamma0, hyper=model.hyper, n_train=5
        )
        messages = validate(broken)
        assert any(m.startswith("S has shape") for m in messages)
        assert any(m.startswith("theta[1] has shape") for m in messages)

    def test_payload_mass(self, rng, make_model):
        """Feature weights that do not sum to 1 are reported."""
        model = make_model(rng, [2, 3, 2])
        broken = EonModel(
            S=model.S,
            theta=model.theta,
            gamma0=Gamma0("feature-weights", w=np.array([0.5, 0.6])),
            hyper=model.hyper,
            n_train=5,
        )
        assert any("gamma0.w sums to" in m for m in validate(broken))

    def test_build_a_matrices_rejects_invalid(self, rng, make_model):
        """Coupling matrices are only built for valid models."""
        model = make_model(rng, [2, 3, 2])
        broken = EonModel(S=model.S, theta=(np.full((3, 2), 0.5),), gamma0=model.gamma0, hyper=model.hyper, n_train=5)
        with pytest.raises(ModelValidationError) as info:
            build_a_matrices(broken)
        assert info.value.violations


class TestCouplingMatrices:
    """Test A^(n) = -delta log theta^T."""

    def test_entries(self):
        """Entries are transposed, scaled and floored."""
        theta = np.array([[0.25, 0.0], [0.75, 1.0]])
        (A,) = compute_a_matrices([theta], [2.0], 1e-12)
        assert A.shape == (2, 2)
        assert A[0, 1] == pytest.approx(-2.0 * np.log(0.75))
        assert A[1, 0] == pytest.approx(-2.0 * np.log(1e-12))
        assert A[1, 1] == 0.0


class TestDescriptorLength:
    """Test the effective parameter count."""

    def _model(self, w, dims=(6, 3, 2)):
        hyper = Hyperparameters(layer_dims=list(dims), epsilon=[0.01, 1e-6, 1e-3], delta=[1e-3])
        theta = np.full((dims[1], dims[2]), 1.0 / dims[1])
        return EonModel(S=np.zeros(dims[:2]), theta=(theta,), gamma0=Gamma0("feature-weights", w=w), hyper=hyper, n_train=9)

    def test_two_informative_features(self):
        """Two informative features, three clusters, two labels count 15."""
        w = np.array([0.5, 0.5 - 4e-5, 1e-5, 1e-5, 1e-5, 1e-5])
        model = self._model(w)
        assert informative_dims(model) == [0, 1]
        assert descriptor_length(model) == 2 * 3 + 3 * 1 + 6

    def test_threshold_is_exclusive(self):
        """A weight equal to the threshold does not count."""
        w = np.array([1e-3, 1 - 1e-3, 0, 0, 0, 0])
        assert informative_dims(self._model(w), 1e-3) == [1]

    def test_non_increasing_in_threshold(self, rng):
        """Raising the threshold never adds parameters."""
        for _ in range(20):
            model = self._model(rng.dirichlet(np.full(6, 0.3)))
            thresholds = np.sort(rng.uniform(0, 0.5, 15))
            lengths = [descriptor_length(model, t) for t in np.concatenate([[0.0], thresholds])]
            assert all(b <= a for a, b in zip(lengths, lengths[1:]))

    def test_fixed_uniform_has_no_weight_parameters(self, rng, make_model):
        """Fixed-uniform models count every feature and no weights."""
        model = make_model(rng, [4, 3, 5, 2], "fixed-uniform")
        assert descriptor_length(model) == 4 * 3 + 4 * 3 + 1 * 5

    def test_rejects_bad_threshold(self, rng, make_model):
        """Thresholds outside [0, 1) are invalid."""
        with pytest.raises(ValueError):
            descriptor_length(make_model(rng, [2, 2, 2]), 1.0)


class TestPersistence:
    """Test binary model files."""

    @pytest.mark.parametrize("mode", ["fixed-uniform", "feature-weights", "rank-1", "full-matrix"])
    def test_round_trip_is_bit_exact(self, rng, make_model, mode):
        """Saving and loading reproduces every array and the same bytes."""
        model = make_model(rng, [3, 4, 2, 3], mode, n_train=6)
        blob = to_bytes(model)
        restored = from_bytes(blob)
        assert to_bytes(restored) == blob
        np.testing.assert_array_equal(restored.S, model.S)
        for a, b in zip(restored.theta, model.theta):
            np.testing.assert_array_equal(a, b)
        assert restored.hyper == model.hyper
        assert restored.n_train == model.n_train

    def test_loss_unchanged_after_reload(self, rng, make_model):
        """A reloaded model evaluates the loss to the same bits."""
        model = make_model(rng, [2, 3, 2], "rank-1", n_train=4)
        restored = from_bytes(to_bytes(model))
        X = rng.uniform(0, 1, (2, 4))
        gammas = [rng.dirichlet(np.ones(3), size=4).T, np.eye(2)[:, [0, 1, 1, 0]]]
        before = loss(gammas, model.gamma0, model.S, model.theta, X, model.hyper)
        after = loss(gammas, restored.gamma0, restored.S, restored.theta, X, restored.hyper)
        assert before == after

    def test_fortran_ordered_arrays_reload_bit_exact(self, rng, make_model):
        """Arrays handed over in column-major order are stored row-major, so a reload evaluates identically."""
        base = make_model(rng, [3, 3, 3], "fixed-uniform", n_train=1)
        model = EonModel(
            S=np.asfortranarray(base.S),
            theta=tuple(np.asfortranarray(t) for t in base.theta),
            gamma0=base.gamma0,
            hyper=base.hyper,
            n_train=1,
        )
        assert model.S.flags.c_contiguous and all(t.flags.c_contiguous for t in model.theta)
        restored = from_bytes(to_bytes(model))
        for _ in range(20):
            X = rng.uniform(0, 1, (3, 1))
            gammas = [rng.dirichlet(np.ones(3), size=1).T, rng.dirichlet(np.ones(3), size=1).T]
            before = loss(gammas, model.gamma0, model.S, model.theta, X, model.hyper)
            after = loss(gammas, restored.gamma0, restored.S, restored.theta, X, restored.hyper)
            assert before == after

    def test_header_layout(self, rng, make_model):
        """Magic, version and a JSON header naming every array."""
        blob = to_bytes(make_model(rng, [2, 3, 2], "rank-1", n_train=4))
        magic, version, length = struct.unpack_from("<8sII", blob)
        assert magic == MAGIC and version == 1
        header = json.loads(blob[16 : 16 + length])
        assert header["endianness"] == "little"
        assert header["layer_dims"] == [2, 3, 2]
        assert [a["name"] for a in header["arrays"]] == ["S", "theta1", "gamma0.w", "gamma0.s"]
        assert len(blob) == 16 + length + 8 * (6 + 6 + 2 + 4)

    def test_save_and_load(self, rng, make_model, tmp_path):
        """Files on disk round trip."""
        model = make_model(rng, [2, 3, 2])
        path = tmp_path / "model.eon"
        save(model, path)
        np.testing.assert_array_equal(load(path).S, model.S)

    def test_missing_file(self, tmp_path):
        """Unreadable paths raise an I/O error."""
        with pytest.raises(ModelIOError):
            load(tmp_path / "absent.eon")

    def test_truncated_file(self, rng, make_model):
        """Chopping bytes off the end is detected."""
        blob = to_bytes(make_model(rng, [2, 3, 2]))
        with pytest.raises(MalformedModelFileError):
            from_bytes(blob[:-8])
        with pytest.raises(MalformedModelFileError):
            from_bytes(blob[:10])

    def test_bad_magic(self, rng, make_model):
        """Foreign files are rejected."""
        blob = to_bytes(make_model(rng, [2, 3, 2]))
        with pytest.raises(MalformedModelFileError):
            from_bytes(b"NOTAMODL" + blob[8:])

    def test_newer_version(self, rng, make_model):
        """Files from a newer writer raise a version mismatch."""
        blob = bytearray(to_bytes(make_model(rng, [2, 3, 2])))
        struct.pack_into("<I", blob, 8, 2)
        with pytest.raises(VersionMismatchError):
            from_bytes(bytes(blob))

    def test_garbled_header(self, rng, make_model):
        """A header that is not JSON is malformed."""
        blob = bytearray(to_bytes(make_model(rng, [2, 3, 2])))
        blob[16] = ord("#")
        with pytest.raises(MalformedModelFileError):
            from_bytes(bytes(blob))


# Hand-assembled file for a [1, 2, 2] fixed-uniform model:
# S = [[0.5, 0.25]], theta1 = [[0.75, 0.5], [0.25, 0.5]]
GOLDEN_HEADER = (
    b'{"N": 1, "arrays": [{"name": "S", "shape": [1, 2]}, {"name": "theta1", "shape": [2, 2]}], '
    b'"endianness": "%s", "format_version": 1, "gamma0_mode": "fixed-uniform", '
    b'"hyperparameters": {"layer_dims": [1, 2, 2], "epsilon": [0.5, 1.0, 1.0], "delta": [1.0], '
    b'"gamma0_mode": "fixed-uniform"}, "layer_dims": [1, 2, 2], "n_train": 3}'
)
GOLDEN_LITTLE = bytes.fromhex(
    "000000000000e03f"  # 0.5
    "000000000000d03f"  # 0.25
    "000000000000e83f"  # 0.75
    "000000000000e03f"
    "000000000000d03f"
    "000000000000e03f"
)
GOLDEN_BIG = bytes.fromhex(
    "3fe0000000000000" "3fd0000000000000" "3fe8000000000000" "3fe0000000000000" "3fd0000000000000" "3fe0000000000000"
)


def _golden_file(endianness: bytes, body: bytes) -> bytes:
    header = GOLDEN_HEADER % endianness
    return b"EONMODEL" + b"\x01\x00\x00\x00" + len(header).to_bytes(4, "little") + header + body


class TestGoldenFile:
    """Test the byte layout against hand-assembled files."""

    @pytest.mark.parametrize("endianness,body", [(b"little", GOLDEN_LITTLE), (b"big", GOLDEN_BIG)])
    def test_reads_hand_assembled_file(self, endianness, body):
        """A file built byte by byte decodes to the documented arrays."""
        model = from_bytes(_golden_file(endianness, body))
        np.testing.assert_array_equal(model.S, [[0.5, 0.25]])
        np.testing.assert_array_equal(model.theta[0], [[0.75, 0.5], [0.25, 0.5]])
        assert model.gamma0.mode == "fixed-uniform"
        assert model.n_train == 3
        assert model.layer_dims == [1, 2, 2]
        assert validate(model) == []

    def test_writer_emits_documented_bytes(self):
        """The writer produces the magic, version, sorted header and little-endian body."""
        hyper = Hyperparameters(layer_dims=[1, 2, 2], epsilon=[0.5, 1.0, 1.0], delta=[1.0], gamma0_mode="fixed-uniform")
        model = EonModel(
            S=np.array([[0.5, 0.25]]),
            theta=(np.array([[0.75, 0.5], [0.25, 0.5]]),),
            gamma0=Gamma0("fixed-uniform"),
            hyper=hyper,
            n_train=3,
        )
        blob = to_bytes(model)
        assert blob[:12] == b"EONMODEL\x01\x00\x00\x00"
        length = int.from_bytes(blob[12:16], "little")
        assert blob[16 : 16 + length].startswith(GOLDEN_HEADER.split(b'"hyperparameters"')[0] % b"little")
        assert blob[16 + length :] == GOLDEN_LITTLE
