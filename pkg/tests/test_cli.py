"""
End-to-end tests of the command-line interface.
"""

import json

import pandas as pd
import pytest

from src import cli
from src.errors import NumericalFailureError
from src.network.persistence import load

pytestmark = pytest.mark.integration

FIT_CONFIG = "layer_dims=6,3,2\nepsilon=5e-3,1e-6,1e-4\ndelta=1e-4\nmax_outer_iters=30\nrestarts=2\n"


@pytest.fixture
def workspace(tmp_path):
    """A generated bioinformatics dataset and a fit config."""
    (tmp_path / "bio.spec").write_text("kind=bioinformatics\nT=90\nseed=1\n")
    (tmp_path / "fit.cfg").write_text(FIT_CONFIG)
    assert cli.main(["generate", str(tmp_path / "bio.spec"), "--out", str(tmp_path / "bio.csv")]) == cli.EXIT_OK
    return tmp_path


@pytest.fixture
def fitted(workspace):
    """The workspace plus a trained model file."""
    code = cli.main(
        [
            "fit",
            str(workspace / "bio.csv"),
            "--config",
            str(workspace / "fit.cfg"),
            "--out",
            str(workspace / "model.eon"),
            "--seed",
            "3",
        ]
    )
    assert code == cli.EXIT_OK
    return workspace


class TestCommands:
    """Test each subcommand's happy path."""

    def test_generate(self, workspace):
        """The dataset CSV has six features and a label column."""
        frame = pd.read_csv(workspace / "bio.csv")
        assert list(frame.columns) == [f"x{d}" for d in range(6)] + ["label"]
        assert len(frame) == 90

    def test_fit_writes_model_and_trace(self, fitted):
        """Fitting leaves a loadable model and a per-iteration trace."""
        model = load(fitted / "model.eon")
        assert model.layer_dims == [6, 3, 2]
        assert model.hyper.seed == 3
        trace = pd.read_csv(f"{fitted / 'model.eon'}.trace.csv")
        losses = trace["loss"].to_numpy()
        assert len(losses) >= 1
        assert all(b <= a + 1e-9 * max(1.0, abs(a)) for a, b in zip(losses, losses[1:]))

    def test_predict(self, fitted):
        """One prediction row per input row."""
        out = fitted / "pred.csv"
        assert cli.main(["predict", str(fitted / "model.eon"), str(fitted / "bio.csv"), "--out", str(out)]) == 0
        frame = pd.read_csv(out)
        assert len(frame) == 90
        assert {"pi0", "pi1", "reliability", "converged"} <= set(frame.columns)
        assert ((frame["pi0"] + frame["pi1"] - 1.0).abs() < 1e-9).all()

    def test_audit(self, fitted):
        """The audit reports descriptor length next to KC and DC."""
        out = fitted / "audit.json"
        code = cli.main(
            ["audit", str(fitted / "model.eon"), "--spec", str(fitted / "bio.spec"), "--out", str(out)]
        )
        assert code == 0
        report = json.loads(out.read_text())
        assert report["kolmogorov_complexity"] == 13
        assert report["data_complexity"] == 90 * 7
        assert report["descriptor_length"] >= 2 * 3 + 3

    def test_check(self, fitted):
        """The condition report names both checks."""
        out = fitted / "check.json"
        assert cli.main(["check", str(fitted / "model.eon"), "--epsilon", "10", "10", "--out", str(out)]) == 0
        report = json.loads(out.read_text())
        assert set(report) == {"uniqueness_holds", "min_epsilon_needed", "contraction_holds", "contraction_constant"}

    def test_check_wrong_epsilon_count(self, fitted):
        """One epsilon per activation layer is required."""
        assert cli.main(["check", str(fitted / "model.eon"), "--epsilon", "1"]) == cli.EXIT_DATA

    def test_adversarial(self, fitted):
        """One row per start with the point and its label entropy."""
        out = fitted / "adv.csv"
        code = cli.main(["adversarial", str(fitted / "model.eon"), "--out", str(out), "--starts", "3"])
        assert code == 0
        frame = pd.read_csv(out)
        assert len(frame) == 3
        assert frame["label_entropy"].between(0.0, 1.0 + 1e-12).all()

    def test_raster(self, fitted):
        """The raster has resolution^2 rows."""
        out = fitted / "raster.csv"
        code = cli.main(
            [
                "raster",
                str(fitted / "model.eon"),
                "--out",
                str(out),
                "--resolution",
                "4",
                "--policy",
                "midpoint",
                "--data",
                str(fitted / "bio.csv"),
            ]
        )
        assert code == 0
        assert len(pd.read_csv(out)) == 16

    def test_cv(self, tmp_path, capsys):
        """A small synthetic experiment writes results and prints the mean."""
        config = tmp_path / "exp.cfg"
        config.write_text(
            "synthetic.kind=bioinformatics\nsynthetic.T=60\nfolds=2\nvalidation_size=6\ntest_size=6\n"
            "grid.K=3\ngrid.delta=1e-3\ngrid.epsilon0=5e-3\ngrid.epsilon1=1e-4\nmax_outer_iters=20\n"
        )
        out = tmp_path / "results.csv"
        assert cli.main(["cv", str(config), "--out", str(out), "--seed", "2"]) == 0
        assert len(pd.read_csv(out)) == 2
        assert json.loads((tmp_path / "results.json").read_text())["config"]["seed"] == 2
        assert "mean test accuracy" in capsys.readouterr().out


class TestExitCodes:
    """Test failure reporting."""

    def test_usage_error(self):
        """argparse exits with code 2."""
        with pytest.raises(SystemExit) as info:
            cli.main(["fit"])
        assert info.value.code == cli.EXIT_USAGE

    def test_missing_dataset(self, workspace):
        """Unreadable data is a data error."""
        code = cli.main(
            ["fit", str(workspace / "absent.csv"), "--config", str(workspace / "fit.cfg"), "--out", "m.eon"]
        )
        assert code == cli.EXIT_DATA

    def test_unwritable_output(self, fitted):
        """Output paths that cannot be written are data errors, not tracebacks."""
        missing = fitted / "no-such-dir"
        code = cli.main(["predict", str(fitted / "model.eon"), str(fitted / "bio.csv"), "--out", str(missing / "p.csv")])
        assert code == cli.EXIT_DATA
        code = cli.main(["generate", str(fitted / "bio.spec"), "--out", str(missing / "bio.csv")])
        assert code == cli.EXIT_DATA
        assert cli.main(["predict", str(fitted / "model.eon"), str(fitted / "bio.csv"), "--out", str(fitted)]) == cli.EXIT_DATA
        assert not missing.exists()

    def test_corrupt_model(self, tmp_path):
        """Malformed model files are data errors."""
        path = tmp_path / "bad.eon"
        path.write_bytes(b"garbage")
        assert cli.main(["audit", str(path)]) == cli.EXIT_DATA

    def test_invalid_config(self, workspace):
        """Hyperparameters failing validation are data errors."""
        (workspace / "bad.cfg").write_text("layer_dims=6,3,2\nepsilon=0,1e-6,1e-4\ndelta=1e-4\n")
        code = cli.main(
            ["fit", str(workspace / "bio.csv"), "--config", str(workspace / "bad.cfg"), "--out", "m.eon"]
        )
        assert code == cli.EXIT_DATA

    def test_numerical_failure(self, workspace, monkeypatch):
        """Numerical failures map to exit code 4."""

        def failing_fit(*args, **kwargs):
            raise NumericalFailureError("non-finite activation cost", layer=1, iteration=2)

        monkeypatch.setattr(cli, "fit", failing_fit)
        code = cli.main(
            ["fit", str(workspace / "bio.csv"), "--config", str(workspace / "fit.cfg"), "--out", "m.eon"]
        )
        assert code == cli.EXIT_NUMERICAL
