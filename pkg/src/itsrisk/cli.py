"""Command-line entry point: scrape, train, predict, cluster, assess,
recommend, report, and the four-step pipeline.

Exit codes: 0 success, 2 validation error, 3 data error, 4 network error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import clustering, configurator, features, predictor, scoring
from .config import RunConfig
from .configurator import Policy
from .errors import DataError, NetworkError, ValidationError
from .records import VulnRecord
from .scraper import (
    EpssSource,
    ExploitDbSource,
    FakeClock,
    Harvester,
    LiveTransport,
    NvdSource,
    OsvSource,
    OtxSource,
    ReplayTransport,
    SystemClock,
)
from .store import VulnStore

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_DATA = 3
EXIT_NETWORK = 4


def _load_nodes(path: str) -> list[tuple[str, str]]:
    """Node pool file: JSON list of {"name": ..., "cpe_pattern": ...}."""
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        return [(entry["name"], entry["cpe_pattern"]) for entry in raw]
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise DataError(f"cannot read node pool file {path}: {exc}") from exc


def _scoring_config(cfg: RunConfig) -> scoring.ScoringConfig:
    return scoring.ScoringConfig(
        now=cfg.now(), oldness_threshold_days=cfg.oldness_threshold_days
    )


def _corpus(store: VulnStore) -> list[tuple[str, str]]:
    return [(r.cve_id, r.description) for r in store.all_records()]


def _cluster_assignment(store: VulnStore, cfg: RunConfig) -> clustering.ClusterAssignment:
    if cfg.embeddings_path:
        matrix = features.load_embeddings(cfg.embeddings_path)
    else:
        corpus = _corpus(store)
        if not corpus:
            raise DataError("store is empty; scrape or import records first")
        matrix = features.featurize_bow(corpus)
    if cfg.cluster_algorithm == "optics":
        return clustering.cluster_optics(
            matrix, min_samples=max(2, cfg.cluster_min_samples), xi=cfg.cluster_xi
        )
    eps = cfg.cluster_eps if cfg.cluster_eps is not None else clustering.default_eps(matrix)
    return clustering.cluster_dbscan(matrix, eps=eps, min_samples=cfg.cluster_min_samples)


def _score_map(store: VulnStore, cfg: RunConfig) -> dict[str, float]:
    scoring_cfg = _scoring_config(cfg)
    scores = {}
    for record in store.all_records():
        if record.base_score is None:
            continue
        scores[record.cve_id] = scoring.reassess(record, scoring_cfg).final
    return scores


def _format(value: float) -> str:
    return f"{value:.4f}"


# -- subcommands ---------------------------------------------------------------


def cmd_scrape(args, cfg: RunConfig) -> int:
    store = VulnStore(cfg.store_path)
    clock = FakeClock() if cfg.fixture_mode else SystemClock()
    sources = []
    if cfg.fixture_mode:
        if not cfg.fixture_dir:
            raise ValidationError("fixture mode needs fixture_dir in the config")
        fixture_dir = Path(cfg.fixture_dir)
        if (fixture_dir / "nvd").exists():
            sources.append(
                NvdSource(ReplayTransport.from_dir(fixture_dir / "nvd"), clock, api_key="fixture")
            )
        if (fixture_dir / "osv").exists():
            sources.append(
                OsvSource(
                    ReplayTransport.from_dir(fixture_dir / "osv"),
                    clock,
                    bulk_archive=cfg.osv_bulk_archive,
                )
            )
        if (fixture_dir / "otx").exists():
            sources.append(
                OtxSource(ReplayTransport.from_dir(fixture_dir / "otx"), clock, api_key="fixture")
            )
    else:
        import os

        transport = LiveTransport()
        sources.append(NvdSource(transport, clock, api_key=os.environ.get("NVD_API_KEY")))
        sources.append(OsvSource(transport, clock, bulk_archive=cfg.osv_bulk_archive))
        otx_key = os.environ.get("OTX_API_KEY")
        if otx_key:
            sources.append(OtxSource(transport, clock, api_key=otx_key))
        else:
            logger.warning("OTX_API_KEY not set; skipping OTX")
    if cfg.exploitdb_mirror:
        sources.append(ExploitDbSource(cfg.exploitdb_mirror))
    if cfg.epss_feed:
        sources.append(EpssSource(feed_path=cfg.epss_feed))
    harvester = Harvester(store, sources, clock)
    if args.daemon:
        logger.info("entering hourly scrape loop; interrupt to stop")
        while True:
            report = harvester.run_due()
            if report:
                print(report.to_table())
            clock.sleep(60)
    report = harvester.run_cycle()
    print(report.to_table())
    print(json.dumps({"total_entries": report.total_entries}))
    return EXIT_OK


def cmd_train(args, cfg: RunConfig) -> int:
    rows = predictor.load_dataset_csv(Path(args.dataset))
    train_rows, heldout = predictor.split_rows(rows, args.seed)
    model = predictor.train(train_rows, split_seed=args.seed)
    model.save(cfg.model_path)
    report = predictor.evaluate(model, heldout)
    print(
        f"trained on {len(train_rows)} rows; held-out accuracy "
        f"{report.accuracy:.3f}, rmse {report.rmse:.3f} (n={report.n_test})"
    )
    print(f"model written to {cfg.model_path}")
    return EXIT_OK


def cmd_predict(args, cfg: RunConfig) -> int:
    model = predictor.TrainedModel.load(cfg.model_path)
    if args.missing:
        store = VulnStore(cfg.store_path)
        updated = predictor.score_missing(store, model)
        print(f"predicted scores for {updated} records")
        return EXIT_OK
    if args.text:
        description = args.text
    elif args.cve:
        store = VulnStore(cfg.store_path)
        description = store.require(args.cve).description
    else:
        raise ValidationError("predict needs --text, --cve, or --missing")
    score, provenance = predictor.predict(model, description)
    print(json.dumps({"score": score, "provenance": provenance.value}))
    return EXIT_OK


def cmd_evaluate(args, cfg: RunConfig) -> int:
    # the supplied dataset must be disjoint from the training rows;
    # the model file does not track which rows those were
    model = predictor.TrainedModel.load(cfg.model_path)
    rows = predictor.load_dataset_csv(Path(args.dataset))
    report = predictor.evaluate(model, rows)
    print(
        json.dumps(
            {"accuracy": report.accuracy, "rmse": report.rmse, "n_test": report.n_test}
        )
    )
    return EXIT_OK


def cmd_cluster(args, cfg: RunConfig) -> int:
    store = VulnStore(cfg.store_path)
    assignment = _cluster_assignment(store, cfg)
    report = clustering.assign_clusters(store, assignment)
    if args.out:
        Path(args.out).write_text(assignment.to_csv(), encoding="utf-8")
    clusters = sorted({l for l in assignment.labels.values() if l != clustering.NOISE})
    print(
        f"clustered {len(assignment.labels)} records into {len(clusters)} clusters; "
        f"{report.updated} labels stored"
    )
    if report.unknown:
        print(f"unknown ids skipped: {', '.join(report.unknown)}")
    return EXIT_OK


def cmd_assess(args, cfg: RunConfig) -> int:
    store = VulnStore(cfg.store_path)
    scoring_cfg = _scoring_config(cfg)
    if args.all:
        records = store.all_records()
    else:
        records = [store.require(args.cve_id)]
    breakdowns = []
    for record in records:
        if record.base_score is None:
            raise DataError(
                f"{record.cve_id} has no base score; train a model and run "
                "`itsrisk predict --missing` first"
            )
        breakdowns.append(scoring.reassess(record, scoring_cfg))
    if args.explain:
        print(json.dumps([b.to_json_dict() for b in breakdowns], indent=2, sort_keys=True))
        return EXIT_OK
    print(f"{'cve_id':<18} {'base':>6} {'adjusted':>9} {'final':>7}  band")
    for b in breakdowns:
        band = scoring.severity_band(min(b.final, 10.0)).value
        print(f"{b.cve_id:<18} {b.base:>6.1f} {b.adjusted:>9.3f} {b.final:>7.3f}  {band}")
    return EXIT_OK


def _recommend(store: VulnStore, cfg: RunConfig, nodes_path: str, n: int | None,
               policy: str | None) -> list[configurator.Configuration]:
    pool = store.build_os_profiles(_load_nodes(nodes_path))
    scores = _score_map(store, cfg)
    clusters = clustering.labels_from_store(store)
    replica_count = n if n is not None else cfg.replica_count
    chosen_policy = Policy(policy) if policy else cfg.ranking_policy
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool_exec:
            return configurator.recommend(
                pool, replica_count, chosen_policy, scores, clusters, map_fn=pool_exec.map
            )
    return configurator.recommend(pool, replica_count, chosen_policy, scores, clusters)


def _ranking_lines(ranking: list[configurator.Configuration], top_k: int) -> list[str]:
    lines = [f"{'rank':<5} {'resilience':>12} {'security':>12}  nodes"]
    for index, config in enumerate(ranking[:top_k], start=1):
        lines.append(
            f"{index:<5} {_format(config.resilience_risk):>12} "
            f"{_format(config.security_risk):>12}  {', '.join(config.names)}"
        )
    return lines


def cmd_recommend(args, cfg: RunConfig) -> int:
    store = VulnStore(cfg.store_path)
    ranking = _recommend(store, cfg, args.nodes, args.n, args.policy)
    print("\n".join(_ranking_lines(ranking, args.top)))
    return EXIT_OK


def cmd_report(args, cfg: RunConfig) -> int:
    store = VulnStore(cfg.store_path)
    batch_dir = Path(args.periods)
    if not batch_dir.is_dir():
        raise DataError(f"period batch directory not found: {batch_dir}")
    batches = []
    for path in sorted(batch_dir.glob("*.jsonl")):
        records = [
            VulnRecord.from_doc(json.loads(line))
            for line in path.read_text(encoding="utf-8").splitlines()
            if line.strip()
        ]
        batches.append((path.stem, records))
    if not batches:
        raise DataError(f"no period .jsonl batches in {batch_dir}")
    series = configurator.evaluation_series(
        store,
        _load_nodes(args.nodes),
        args.n or cfg.replica_count,
        Policy(args.policy) if args.policy else cfg.ranking_policy,
        batches,
        _scoring_config(cfg),
        clusters=clustering.labels_from_store(store) or None,
    )
    lines = ["period,security,resilience"]
    lines += [
        f"{row.period},{_format(row.security)},{_format(row.resilience)}"
        for row in series
    ]
    csv_text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(csv_text, encoding="utf-8")
    print(csv_text, end="")
    return EXIT_OK


def cmd_pipeline(args, cfg: RunConfig) -> int:
    """The four-step flow: predict missing, cluster, reassess, recommend."""
    store = VulnStore(cfg.store_path)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    # step 1: predict scores for records that have none
    missing = [r for r in store.all_records() if r.base_score is None]
    if missing:
        try:
            model = predictor.TrainedModel.load(cfg.model_path)
        except DataError as exc:
            raise DataError(
                f"pipeline step 1 (predict) failed: {exc}; train a model or "
                "remove unscored records"
            ) from exc
        predictor.score_missing(store, model)
    predicted = sum(
        1 for r in store.all_records() if r.score_provenance.value == "Predicted"
    )
    (out_dir / "predictions.csv").write_text(
        "cve_id,score\n"
        + "".join(
            f"{r.cve_id},{r.cvss_v3_score}\n"
            for r in sorted(store.all_records(), key=lambda r: r.cve_id)
            if r.score_provenance.value == "Predicted"
        ),
        encoding="utf-8",
    )

    # step 2: cluster descriptions
    try:
        assignment = _cluster_assignment(store, cfg)
    except (DataError, ValidationError) as exc:
        raise type(exc)(f"pipeline step 2 (cluster) failed: {exc}") from exc
    clustering.assign_clusters(store, assignment)
    (out_dir / "clusters.csv").write_text(assignment.to_csv(), encoding="utf-8")

    # step 3: reassess everything
    scoring_cfg = _scoring_config(cfg)
    try:
        breakdowns = [
            scoring.reassess(record, scoring_cfg)
            for record in sorted(store.all_records(), key=lambda r: r.cve_id)
        ]
    except DataError as exc:
        raise DataError(f"pipeline step 3 (reassess) failed: {exc}") from exc
    (out_dir / "scores.csv").write_text(
        "cve_id,base,adjusted,final\n"
        + "".join(
            f"{b.cve_id},{b.base},{_format(b.adjusted)},{_format(b.final)}\n"
            for b in breakdowns
        ),
        encoding="utf-8",
    )

    # step 4: enumerate and rank configurations
    try:
        ranking = _recommend(store, cfg, args.nodes, args.n, args.policy)
    except DataError as exc:
        raise DataError(f"pipeline step 4 (recommend) failed: {exc}") from exc
    top = ranking[0]
    recommendation = {
        "policy": (args.policy or cfg.policy),
        "replica_count": args.n or cfg.replica_count,
        "predicted_records": predicted,
        "top": {
            "nodes": list(top.names),
            "resilience_risk": _format(top.resilience_risk),
            "security_risk": _format(top.security_risk),
        },
        "ranking": [
            {
                "nodes": list(config.names),
                "resilience_risk": _format(config.resilience_risk),
                "security_risk": _format(config.security_risk),
            }
            for config in ranking[:10]
        ],
    }
    report_path = out_dir / "recommendation.json"
    report_path.write_text(
        json.dumps(recommendation, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    print("\n".join(_ranking_lines(ranking, 5)))
    print(f"recommendation written to {report_path}")
    return EXIT_OK


# -- argument parsing ------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="itsrisk",
        description="OSINT-fed vulnerability risk manager for intrusion tolerant systems",
    )
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--store", help="store directory (overrides config)")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scrape", help="harvest all configured OSINT sources")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--once", action="store_true", default=True)
    group.add_argument("--daemon", action="store_true")
    p.set_defaults(func=cmd_scrape)

    p = sub.add_parser("train", help="train the score predictor on a dataset CSV")
    p.add_argument("--dataset", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="predict scores for unassessed records")
    p.add_argument("--text", help="predict for a literal description")
    p.add_argument("--cve", help="predict for a stored CVE id")
    p.add_argument("--missing", action="store_true", help="score all unscored records")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="evaluate the model on a held-out dataset CSV")
    p.add_argument("--dataset", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("cluster", help="cluster descriptions and store labels")
    p.add_argument("--out", help="write the assignment CSV here")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("assess", help="reassess one CVE or the whole store")
    p.add_argument("cve_id", nargs="?")
    p.add_argument("--all", action="store_true")
    p.add_argument("--explain", action="store_true", help="dump breakdown JSON")
    p.set_defaults(func=cmd_assess)

    p = sub.add_parser("recommend", help="rank node configurations by risk")
    p.add_argument("--nodes", required=True, help="JSON node pool file")
    p.add_argument("--n", type=int, help="replica count")
    p.add_argument("--policy", choices=[pol.value for pol in Policy])
    p.add_argument("--top", type=int, default=10)
    p.set_defaults(func=cmd_recommend)

    p = sub.add_parser("report", help="per-period risk series over injected batches")
    p.add_argument("--periods", required=True, help="directory of period .jsonl batches")
    p.add_argument("--nodes", required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--policy", choices=[pol.value for pol in Policy])
    p.add_argument("--out", help="write the CSV here")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("pipeline", help="predict, cluster, reassess, recommend")
    p.add_argument("--nodes", required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--policy", choices=[pol.value for pol in Policy])
    p.add_argument("--out-dir", default="pipeline-out")
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = RunConfig.load(args.config, {"store_path": args.store})
        if args.command == "assess" and not args.all and not args.cve_id:
            raise ValidationError("assess needs a CVE id or --all")
        return args.func(args, cfg)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NetworkError as exc:
        print(f"network error: {exc}", file=sys.stderr)
        return EXIT_NETWORK


if __name__ == "__main__":
    sys.exit(main())
