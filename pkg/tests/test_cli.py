import json

import pytest

from carworth.cli import main

from conftest import csv_bytes, csv_line


def write_fixture_csv(path, n=40):
    """A CSV with n valid rows of varied values plus three rejectable ones."""
    brands = ["audi", "bmw", "opel", "volkswagen"]
    vehicles = ["bus", "coupe", "kleinwagen", "suv"]
    models = ["3er", "astra", "golf"]
    lines = []
    for i in range(n):
        lines.append(csv_line(
            price=str(800 + 311 * i),
            brand=brands[i % 4],
            vehicleType=vehicles[(i // 3) % 4],
            model=models[i % 3],
            yearOfRegistration=str(1995 + i % 20),
            powerPS=str(50 + (i * 17) % 250),
            kilometer=str(5000 * (1 + i % 30)),
            fuelType="benzin" if i % 2 else "diesel",
            gearbox="automatik" if i % 3 == 0 else "manuell",
            notRepairedDamage="nein" if i % 5 else "ja",
        ))
    lines.append(csv_line(seller="gewerblich"))
    lines.append(csv_line(price=""))
    lines.append(csv_line(yearOfRegistration="1850"))
    path.write_bytes(csv_bytes(*lines))
    return path


@pytest.fixture
def clean_file(tmp_path):
    csv_path = write_fixture_csv(tmp_path / "raw.csv")
    out = tmp_path / "clean.cwc"
    assert main(["ingest", "--input", str(csv_path), "--output", str(out)]) == 0
    return out


class TestIngest:
    def test_writes_dataset_and_conserved_report(self, tmp_path, capsys):
        csv_path = write_fixture_csv(tmp_path / "raw.csv")
        out = tmp_path / "clean.cwc"
        assert main(["ingest", "--input", str(csv_path), "--output", str(out)]) == 0
        assert out.exists()

        report = json.loads((tmp_path / "clean.cwc.report.json").read_text())
        removed = sum(r["removed"] for r in report["rules"])
        assert report["input_rows"] == report["surviving_rows"] + removed
        assert report["input_rows"] == 43
        assert report["surviving_rows"] == 40
        # the same JSON is printed for piping
        printed = json.loads(capsys.readouterr().out)
        assert printed == report

    def test_missing_input_fails(self, tmp_path, capsys):
        rc = main(["ingest", "--input", str(tmp_path / "nope.csv"),
                   "--output", str(tmp_path / "x.cwc")])
        assert rc == 1
        assert "not found" in capsys.readouterr().err

    def test_config_override(self, tmp_path):
        csv_path = write_fixture_csv(tmp_path / "raw.csv")
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"power_ps_min": 100}))
        out = tmp_path / "clean.cwc"
        assert main(["ingest", "--input", str(csv_path), "--output", str(out),
                     "--config", str(cfg)]) == 0
        report = json.loads((tmp_path / "clean.cwc.report.json").read_text())
        assert report["rules"][3]["removed"] > 0  # rule 4 now bites


class TestEda:
    def test_report_written(self, clean_file, tmp_path):
        out = tmp_path / "eda.json"
        assert main(["eda", "--input", str(clean_file), "--out", str(out)]) == 0
        report = json.loads(out.read_text())
        assert report["rows"] == 40
        assert sum(b["count"] for b in report["age_histogram"]["bins"]) == 40


class TestTrain:
    def test_same_seed_gives_byte_identical_models(self, clean_file, tmp_path):
        a, b = tmp_path / "a.cwm", tmp_path / "b.cwm"
        for out in (a, b):
            assert main(["train", "--input", str(clean_file), "--trees", "50",
                         "--seed", "7", "--out", str(out)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_different_seed_differs(self, clean_file, tmp_path):
        a, b = tmp_path / "a.cwm", tmp_path / "b.cwm"
        assert main(["train", "--input", str(clean_file), "--trees", "20",
                     "--seed", "1", "--out", str(a)]) == 0
        assert main(["train", "--input", str(clean_file), "--trees", "20",
                     "--seed", "2", "--out", str(b)]) == 0
        assert a.read_bytes() != b.read_bytes()

    def test_jobs_do_not_change_bytes(self, clean_file, tmp_path):
        a, b = tmp_path / "a.cwm", tmp_path / "b.cwm"
        assert main(["train", "--input", str(clean_file), "--trees", "8",
                     "--seed", "3", "--out", str(a), "--jobs", "1"]) == 0
        assert main(["train", "--input", str(clean_file), "--trees", "8",
                     "--seed", "3", "--out", str(b), "--jobs", "2"]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_sample_mode_records_settings(self, clean_file, tmp_path):
        from carworth.model_io import load_model

        out = tmp_path / "s.cwm"
        assert main(["train", "--input", str(clean_file), "--trees", "5",
                     "--seed", "4", "--out", str(out), "--sample", "20"]) == 0
        model = load_model(out)
        assert model.build_info["sample_rows"] == 20
        assert model.build_info["training_rows"] == 14  # round(0.7 * 20)


class TestEval:
    def test_eval_after_train(self, clean_file, tmp_path, capsys):
        model = tmp_path / "m.cwm"
        assert main(["train", "--input", str(clean_file), "--trees", "10",
                     "--seed", "7", "--out", str(model)]) == 0
        out = tmp_path / "eval.json"
        assert main(["eval", "--model", str(model), "--input", str(clean_file),
                     "--out", str(out)]) == 0
        report = json.loads(out.read_text())
        assert report["train_r2"] <= 1.0
        assert report["chosen_n_estimators"] == 10
        assert report["split"]["seed"] == 7
        assert "train R2" in capsys.readouterr().out

    def test_eval_without_model_fails_clearly(self, clean_file, tmp_path, capsys):
        rc = main(["eval", "--model", str(tmp_path / "missing.cwm"),
                   "--input", str(clean_file), "--out", str(tmp_path / "r.json")])
        assert rc == 1
        assert "no such model file" in capsys.readouterr().err

    def test_explicit_seed_overrides_recorded_one(self, clean_file, tmp_path):
        model = tmp_path / "m.cwm"
        main(["train", "--input", str(clean_file), "--trees", "5",
              "--seed", "7", "--out", str(model)])
        out = tmp_path / "eval.json"
        assert main(["eval", "--model", str(model), "--input", str(clean_file),
                     "--seed", "8", "--out", str(out)]) == 0
        assert json.loads(out.read_text())["split"]["seed"] == 8


class TestServe:
    def test_serve_without_model_fails(self, capsys, monkeypatch):
        monkeypatch.delenv("CARWORTH_MODEL", raising=False)
        assert main(["serve"]) == 1
        assert "CARWORTH_MODEL" in capsys.readouterr().err


def test_usage_error_exits_nonzero():
    with pytest.raises(SystemExit) as exc:
        main(["train", "--input"])  # missing value and required flags
    assert exc.value.code != 0
