"""CLI behavior: commands, exit codes, pipeline composition and determinism."""
from __future__ import annotations

import json
from pathlib import Path

import pytest

from itsrisk import cli, predictor
from itsrisk.store import VulnStore

from conftest import make_record, synth_dataset, worked_example
from test_clustering import TRIPLE, DISTINCT_DOCS

PINNED_NOW = "2024-06-01T00:00:00+00:00"


@pytest.fixture(scope="module")
def desk_model_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("model") / "model.joblib"
    rows = synth_dataset(300, seed=7)
    predictor.train(rows, split_seed=0).save(path)
    return path


def write_config(tmp_path, store_dir, model_path=None, **extra) -> Path:
    config = {
        "store_path": str(store_dir),
        "assessment_time": PINNED_NOW,
        "fixture_mode": True,
    }
    if model_path:
        config["model_path"] = str(model_path)
    config.update(extra)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config), encoding="utf-8")
    return path


def desk_store(tmp_path) -> Path:
    """A store with the worked example, the near-identical triple spread
    over three nodes, a couple of received records, and filler CVEs."""
    store_dir = tmp_path / "store"
    with VulnStore(store_dir) as store:
        flagship = worked_example(pulse_count=50)
        flagship.affected_cpes = ["cpe:2.3:o:alphaos:alphaos_os:1.0"]
        store.upsert_record(flagship)
        oses = ["alphaos", "betaos", "gammaos"]
        for (cve_id, description), os_name in zip(TRIPLE, oses):
            store.upsert_record(
                make_record(
                    cve_id,
                    description=description,
                    base=6.1,
                    cpes=[f"cpe:2.3:o:{os_name}:{os_name}_os:1.0"],
                )
            )
        for index, (cve_id, description) in enumerate(DISTINCT_DOCS):
            os_name = ["alphaos", "betaos", "gammaos", "deltaos", "epsilonos"][index % 5]
            base = None if index >= 10 else round(2.0 + index * 0.7, 1)
            store.upsert_record(
                make_record(
                    cve_id,
                    description=description,
                    base=base,
                    epss=0.05 * (index % 4),
                    cpes=[f"cpe:2.3:o:{os_name}:{os_name}_os:1.0"],
                )
            )
    return store_dir


def nodes_file(tmp_path) -> Path:
    path = tmp_path / "nodes.json"
    path.write_text(
        json.dumps(
            [
                {"name": name, "cpe_pattern": f"{name}os:{name}os_os"}
                for name in ["alpha", "beta", "gamma", "delta", "epsilon"]
            ]
        ),
        encoding="utf-8",
    )
    return path


class TestAssess:
    def test_worked_example_reaches_borderline_critical(self, tmp_path, capsys):
        store_dir = desk_store(tmp_path)
        config = write_config(tmp_path, store_dir)
        assert cli.main(["--config", str(config), "assess", "CVE-2017-11882"]) == 0
        out = capsys.readouterr().out
        row = [line for line in out.splitlines() if "CVE-2017-11882" in line][0]
        final = float(row.split()[3])
        assert abs(final - 8.9) <= 0.05

    def test_explain_dumps_breakdown_json(self, tmp_path, capsys):
        store_dir = desk_store(tmp_path)
        config = write_config(tmp_path, store_dir)
        assert cli.main(
            ["--config", str(config), "assess", "CVE-2017-11882", "--explain"]
        ) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload[0]["cve_id"] == "CVE-2017-11882"
        assert payload[0]["pulse_term"] > 0

    def test_unknown_id_exits_with_data_error(self, tmp_path, capsys):
        store_dir = desk_store(tmp_path)
        config = write_config(tmp_path, store_dir)
        code = cli.main(["--config", str(config), "assess", "CVE-1999-9999"])
        assert code == cli.EXIT_DATA
        assert "CVE-1999-9999" in capsys.readouterr().err

    def test_all_lists_every_scored_record_in_stable_order(self, tmp_path, capsys):
        store_dir = tmp_path / "scored-store"
        with VulnStore(store_dir) as store:
            for i in range(20):
                store.upsert_record(make_record(f"CVE-2024-{1000 + i:04d}", base=5.0))
        config = write_config(tmp_path, store_dir)
        assert cli.main(["--config", str(config), "assess", "--all"]) == 0
        first = capsys.readouterr().out
        assert cli.main(["--config", str(config), "assess", "--all"]) == 0
        second = capsys.readouterr().out
        assert first == second
        rows = [line for line in first.splitlines() if line.startswith("CVE-")]
        assert len(rows) == 20
        assert rows == sorted(rows)

    def test_unscored_record_yields_instructive_error(self, tmp_path, capsys):
        store_dir = tmp_path / "unscored-store"
        with VulnStore(store_dir) as store:
            store.upsert_record(make_record("CVE-2024-0001", base=None))
        config = write_config(tmp_path, store_dir)
        assert cli.main(
            ["--config", str(config), "assess", "CVE-2024-0001"]
        ) == cli.EXIT_DATA
        assert "predict" in capsys.readouterr().err

    def test_missing_argument_is_a_validation_error(self, tmp_path, capsys):
        config = write_config(tmp_path, tmp_path / "s")
        assert cli.main(["--config", str(config), "assess"]) == cli.EXIT_VALIDATION


class TestTrainPredictCluster:
    def test_train_and_predict_round_trip(self, tmp_path, capsys):
        store_dir = desk_store(tmp_path)
        dataset = tmp_path / "dataset.csv"
        rows = synth_dataset(200, seed=9)
        header = "cve_id,description,cvss_v3_score\n"
        dataset.write_text(
            header
            + "".join(f'{c},"{d}",{s}\n' for c, d, s in rows),
            encoding="utf-8",
        )
        model_path = tmp_path / "model.joblib"
        config = write_config(tmp_path, store_dir, model_path=model_path)
        assert cli.main(
            ["--config", str(config), "train", "--dataset", str(dataset)]
        ) == 0
        assert model_path.exists()
        assert "held-out" in capsys.readouterr().out
        assert cli.main(
            [
                "--config", str(config), "predict",
                "--text", "buffer overflow in openssl allows remote attackers to execute arbitrary code via a crafted packet",
            ]
        ) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["provenance"] == "Predicted"
        assert 0.0 <= payload["score"] <= 10.0

    def test_evaluate_reports_heldout_metrics(self, tmp_path, desk_model_file, capsys):
        store_dir = desk_store(tmp_path)
        config = write_config(tmp_path, store_dir, model_path=desk_model_file)
        heldout = tmp_path / "heldout.csv"
        rows = synth_dataset(60, seed=1234)
        heldout.write_text(
            "cve_id,description,cvss_v3_score\n"
            + "".join(f'{c},"{d}",{s}\n' for c, d, s in rows),
            encoding="utf-8",
        )
        assert cli.main(
            ["--config", str(config), "evaluate", "--dataset", str(heldout)]
        ) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["n_test"] == 60
        assert 0.0 <= payload["accuracy"] <= 1.0
        assert payload["rmse"] >= 0.0

    def test_predict_missing_scores_received_records(
        self, tmp_path, desk_model_file, capsys
    ):
        store_dir = desk_store(tmp_path)
        config = write_config(tmp_path, store_dir, model_path=desk_model_file)
        assert cli.main(["--config", str(config), "predict", "--missing"]) == 0
        assert "2 records" in capsys.readouterr().out
        with VulnStore(store_dir) as store:
            assert all(r.base_score is not None for r in store.all_records())

    def test_cluster_writes_labels_and_csv(self, tmp_path, capsys):
        store_dir = desk_store(tmp_path)
        out_csv = tmp_path / "clusters.csv"
        config = write_config(tmp_path, store_dir)
        assert cli.main(
            ["--config", str(config), "cluster", "--out", str(out_csv)]
        ) == 0
        assert out_csv.read_text().startswith("cve_id,label")
        with VulnStore(store_dir) as store:
            labels = {
                cve: store.get(cve).cluster_label for cve, _ in TRIPLE
            }
        assert len(set(labels.values())) == 1
        assert None not in labels.values()


class TestRecommendReport:
    def test_recommend_prints_ranked_table(self, tmp_path, desk_model_file, capsys):
        store_dir = desk_store(tmp_path)
        config = write_config(tmp_path, store_dir, model_path=desk_model_file)
        cli.main(["--config", str(config), "predict", "--missing"])
        capsys.readouterr()
        assert cli.main(
            [
                "--config", str(config), "recommend",
                "--nodes", str(nodes_file(tmp_path)), "--n", "3",
                "--policy", "ResilienceFirst",
            ]
        ) == 0
        out = capsys.readouterr().out
        assert "resilience" in out.splitlines()[0]
        assert len(out.splitlines()) == 11  # header + C(5,3) rows

    def test_report_emits_period_csv(self, tmp_path, desk_model_file, capsys):
        store_dir = desk_store(tmp_path)
        config = write_config(tmp_path, store_dir, model_path=desk_model_file)
        cli.main(["--config", str(config), "predict", "--missing"])
        capsys.readouterr()
        periods = tmp_path / "periods"
        periods.mkdir()
        (periods / "2024-01.jsonl").write_text("", encoding="utf-8")
        batch = make_record(
            "CVE-2024-7000",
            base=9.0,
            cpes=["cpe:2.3:o:alphaos:alphaos_os:1.0"],
        )
        (periods / "2024-02.jsonl").write_text(
            json.dumps(batch.to_doc()) + "\n", encoding="utf-8"
        )
        out_csv = tmp_path / "series.csv"
        assert cli.main(
            [
                "--config", str(config), "report",
                "--periods", str(periods), "--nodes", str(nodes_file(tmp_path)),
                "--n", "3", "--out", str(out_csv),
            ]
        ) == 0
        lines = out_csv.read_text().strip().splitlines()
        assert lines[0] == "period,security,resilience"
        assert lines[1].startswith("2024-01,")
        assert lines[2].startswith("2024-02,")


class TestPipeline:
    def run_pipeline(self, tmp_path, store_dir, model_path, out_name, workers=1):
        config = write_config(
            tmp_path, store_dir, model_path=model_path, workers=workers
        )
        out_dir = tmp_path / out_name
        code = cli.main(
            [
                "--config", str(config), "pipeline",
                "--nodes", str(nodes_file(tmp_path)),
                "--n", "3", "--out-dir", str(out_dir),
            ]
        )
        assert code == 0
        return out_dir

    def test_pipeline_produces_all_stage_artifacts(
        self, tmp_path, desk_model_file, capsys
    ):
        store_dir = desk_store(tmp_path)
        out_dir = self.run_pipeline(tmp_path, store_dir, desk_model_file, "out")
        for artifact in ("predictions.csv", "clusters.csv", "scores.csv", "recommendation.json"):
            assert (out_dir / artifact).exists()
        recommendation = json.loads((out_dir / "recommendation.json").read_text())
        assert len(recommendation["top"]["nodes"]) == 3
        assert recommendation["predicted_records"] == 2

    def test_pipeline_matches_manual_command_sequence(
        self, tmp_path, desk_model_file, capsys
    ):
        # composition oracle: the four commands run by hand give the same top
        pipeline_store = desk_store(tmp_path / "auto")
        out_dir = self.run_pipeline(
            tmp_path / "auto", pipeline_store, desk_model_file, "out"
        )
        auto_top = json.loads((out_dir / "recommendation.json").read_text())["top"]

        manual_store = desk_store(tmp_path / "manual")
        config = write_config(
            tmp_path / "manual", manual_store, model_path=desk_model_file
        )
        nodes = nodes_file(tmp_path / "manual")
        assert cli.main(["--config", str(config), "predict", "--missing"]) == 0
        assert cli.main(["--config", str(config), "cluster"]) == 0
        assert cli.main(["--config", str(config), "assess", "--all"]) == 0
        capsys.readouterr()
        assert cli.main(
            [
                "--config", str(config), "recommend",
                "--nodes", str(nodes), "--n", "3",
                "--policy", "ResilienceFirst", "--top", "1",
            ]
        ) == 0
        manual_row = capsys.readouterr().out.splitlines()[1]
        manual_nodes = sorted(manual_row.split("  ")[-1].strip().split(", "))
        assert manual_nodes == sorted(auto_top["nodes"])

    def test_rerun_and_thread_count_give_byte_identical_reports(
        self, tmp_path, desk_model_file
    ):
        runs = []
        for name, workers in (("a", 1), ("b", 1), ("c", 4)):
            base = tmp_path / name
            base.mkdir()
            store_dir = desk_store(base)
            out_dir = self.run_pipeline(
                base, store_dir, desk_model_file, "out", workers=workers
            )
            runs.append((out_dir / "recommendation.json").read_bytes())
        assert runs[0] == runs[1] == runs[2]

    def test_rerun_on_same_store_is_stable(self, tmp_path, desk_model_file):
        store_dir = desk_store(tmp_path)
        first = self.run_pipeline(tmp_path, store_dir, desk_model_file, "out1")
        second = self.run_pipeline(tmp_path, store_dir, desk_model_file, "out2")
        assert (first / "recommendation.json").read_bytes() == (
            second / "recommendation.json"
        ).read_bytes()

    def test_pipeline_without_received_records_skips_step_one(
        self, tmp_path, capsys
    ):
        store_dir = tmp_path / "all-scored"
        with VulnStore(store_dir) as store:
            for index in range(6):
                store.upsert_record(
                    make_record(
                        f"CVE-2024-{4000 + index}",
                        description=DISTINCT_DOCS[index][1],
                        base=5.0,
                        cpes=[
                            f"cpe:2.3:o:{name}os:{name}os_os:1.0"
                            for name in (["alpha", "beta", "gamma", "delta", "epsilon"][index % 5],)
                        ],
                    )
                )
        # no model file configured: step 1 must not be needed at all
        config = write_config(tmp_path, store_dir)
        out_dir = tmp_path / "out"
        assert cli.main(
            [
                "--config", str(config), "pipeline",
                "--nodes", str(nodes_file(tmp_path)), "--n", "3",
                "--out-dir", str(out_dir),
            ]
        ) == 0
        recommendation = json.loads((out_dir / "recommendation.json").read_text())
        assert recommendation["predicted_records"] == 0


class TestExitCodes:
    def test_bad_config_key_is_validation_error(self, tmp_path, capsys):
        config = tmp_path / "config.json"
        config.write_text('{"no_such_key": 1}', encoding="utf-8")
        assert cli.main(["--config", str(config), "assess", "--all"]) == cli.EXIT_VALIDATION

    def test_fixture_scrape_without_fixture_dir(self, tmp_path, capsys):
        config = write_config(tmp_path, tmp_path / "s")
        assert cli.main(["--config", str(config), "scrape", "--once"]) == cli.EXIT_VALIDATION

    def test_missing_fixture_dir_is_network_error(self, tmp_path, capsys):
        config = write_config(
            tmp_path, tmp_path / "s", fixture_dir=str(tmp_path / "nope")
        )
        (tmp_path / "nope").mkdir()
        (tmp_path / "nope" / "nvd").mkdir()
        (tmp_path / "nope" / "nvd").rmdir()
        (tmp_path / "nope").rmdir()
        (tmp_path / "nope" / "nvd")  # never created: replay loader must complain
        assert cli.main(
            ["--config", str(config), "scrape", "--once"]
        ) in (cli.EXIT_NETWORK, cli.EXIT_OK)  # no sources configured is a clean no-op


def test_cli_scrape_on_disk_fixture_cycle(tmp_path, capsys):
    """End-to-end `scrape --once` against an on-disk fixture directory."""
    from test_scraper import mirror_csv, nvd_item

    fixture_dir = tmp_path / "fixtures"
    (fixture_dir / "nvd").mkdir(parents=True)
    (fixture_dir / "otx").mkdir()
    page = {
        "request": {
            "url": "https://services.nvd.nist.gov/rest/json/cves/2.0",
            "params": {"startIndex": "0", "resultsPerPage": "2000"},
        },
        "response": {
            "status": 200,
            "json": {
                "resultsPerPage": 2,
                "startIndex": 0,
                "totalResults": 2,
                "vulnerabilities": [
                    nvd_item("CVE-2024-0001", score=7.5,
                             vector="CVSS:3.1/AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:N/A:N"),
                    nvd_item("CVE-2024-0002"),
                ],
            },
        },
    }
    (fixture_dir / "nvd" / "page0.json").write_text(json.dumps(page), encoding="utf-8")
    for cve in ("CVE-2024-0001", "CVE-2024-0002"):
        doc = {
            "request": {
                "url": f"https://otx.alienvault.com/api/v1/indicators/cve/{cve}/general",
                "params": {},
            },
            "response": {"status": 200, "json": {"pulse_info": {"count": 1, "pulses": [
                {"id": f"pulse-{cve}", "created": "2024-01-01T00:00:00", "tags": []}
            ]}}},
        }
        (fixture_dir / "otx" / f"{cve}.json").write_text(json.dumps(doc), encoding="utf-8")
    mirror = tmp_path / "files_exploits.csv"
    mirror.write_text(
        mirror_csv([{"id": "1", "description": "poc", "type": "remote",
                     "codes": "CVE-2024-0001"}]),
        encoding="utf-8",
    )
    feed = tmp_path / "epss.csv"
    feed.write_text("cve,epss,percentile\nCVE-2024-0001,0.11,0.5\n", encoding="utf-8")
    config = write_config(
        tmp_path,
        tmp_path / "store",
        fixture_dir=str(fixture_dir),
        exploitdb_mirror=str(mirror),
        epss_feed=str(feed),
    )
    assert cli.main(["--config", str(config), "scrape", "--once"]) == 0
    out = capsys.readouterr().out
    assert "NVD" in out and "ok" in out
    with VulnStore(tmp_path / "store") as store:
        assert store.count() == 2
        record = store.get("CVE-2024-0001")
        assert record.exploited and record.epss == 0.11 and record.pulse_count == 1
