"""Command line entry points: index, run, eval, report.

Machine-readable JSON log lines go to stderr; short human summaries go to
stdout. Exit codes: 0 on success, 1 on runtime failures (backend
exhaustion, bad input data), 2 on configuration or usage errors.
"""

from __future__ import annotations

import json
import logging
import re
import sys
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from pathlib import Path
from typing import Any

import click

from .config import (
    RunConfig,
    build_backend,
    build_judge,
    build_scorer,
    build_verifier,
    load_config,
)
from .corpus import ingest_corpus, load_queries
from .errors import ConfigError, EvoAnswerError, IterationStarvationError
from .evaluation import EvalReport, emit_report, evaluate_traces
from .evolution import EvolutionTrace, evolve
from .retrieval import build_index, load_index, save_index, seed_population

logger = logging.getLogger("evoanswer")

_LOG_RECORD_FIELDS = set(
    vars(logging.LogRecord("", 0, "", 0, "", (), None))
) | {"message", "asctime", "taskName"}


class _JsonLogFormatter(logging.Formatter):
    """One JSON object per log line; extra record fields pass through."""

    def format(self, record: logging.LogRecord) -> str:
        entry: dict[str, Any] = {
            "level": record.levelname.lower(),
            "logger": record.name,
            "message": record.getMessage(),
        }
        for key, value in record.__dict__.items():
            if key not in _LOG_RECORD_FIELDS and not key.startswith("_"):
                entry[key] = value
        return json.dumps(entry, sort_keys=True, default=str)


def _setup_logging(verbose: bool) -> None:
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(_JsonLogFormatter())
    root = logging.getLogger()
    root.handlers[:] = [handler]
    root.setLevel(logging.DEBUG if verbose else logging.INFO)


@contextmanager
def _exit_codes():
    """Map error families to the exit-code contract."""
    try:
        yield
    except ConfigError as err:
        logger.error(str(err))
        raise SystemExit(2) from err
    except EvoAnswerError as err:
        logger.error(str(err))
        raise SystemExit(1) from err
    except OSError as err:
        logger.error(str(err))
        raise SystemExit(1) from err


def _safe_name(query_id: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]", "_", query_id)


# Config keys that live under "evolution" in the JSON document.
_EVOLUTION_KEYS = {
    "lambda",
    "rouge_variant",
    "grounding_mode",
    "offspring_per_iteration",
    "parent_count",
    "population_cap",
    "top_d",
    "max_iterations",
    "rng_seed",
    "parallelism",
}


def _apply_overrides(config: RunConfig, overrides: dict[str, Any]) -> RunConfig:
    """Overlay non-None CLI flag values onto a loaded config."""
    data = config.to_dict()
    for key, value in overrides.items():
        if value is None:
            continue
        if key in _EVOLUTION_KEYS:
            data["evolution"][key] = value
        else:
            data[key] = value
    return RunConfig.from_dict(data)


def _config_options(fn):
    """Flag-per-key overrides for every run config field."""
    options = [
        click.option("--backend", default=None, help="Rewriter backend kind."),
        click.option("--scorer", default=None, help="Fitness relevance scorer kind."),
        click.option("--verifier", default=None, help="Grounding verifier kind."),
        click.option("--judge", default=None, help="Evaluation judge kind."),
        click.option("--noise-p", "noise_p", type=float, default=None),
        click.option(
            "--scorer-density-power", "scorer_density_power", type=float, default=None
        ),
        click.option(
            "--judge-density-power", "judge_density_power", type=float, default=None
        ),
        click.option("--sidecar-url", "sidecar_url", default=None),
        click.option("--api-key", "api_key", default=None),
        click.option("--first-k", "first_k", type=int, default=None),
        click.option("--seed-count", "seed_count", type=int, default=None),
        click.option("--output-dir", "output_dir", default=None),
        click.option("--lambda", "lambda_", type=float, default=None),
        click.option("--rouge-variant", "rouge_variant", default=None),
        click.option("--grounding-mode", "grounding_mode", default=None),
        click.option(
            "--offspring-per-iteration", "offspring_per_iteration", type=int, default=None
        ),
        click.option("--parent-count", "parent_count", type=int, default=None),
        click.option("--population-cap", "population_cap", type=int, default=None),
        click.option("--top-d", "top_d", type=int, default=None),
        click.option("--max-iterations", "max_iterations", type=int, default=None),
        click.option("--rng-seed", "rng_seed", type=int, default=None),
        click.option("--parallelism", type=int, default=None),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def _collect_overrides(kwargs: dict[str, Any]) -> dict[str, Any]:
    overrides = dict(kwargs)
    if "lambda_" in overrides:
        overrides["lambda"] = overrides.pop("lambda_")
    return overrides


@click.group()
@click.option("--verbose", is_flag=True, help="Enable debug logging.")
def main(verbose: bool) -> None:
    """Evolve grounded answers from retrieved documents."""
    _setup_logging(verbose)


@main.command()
@click.option(
    "--corpus",
    "corpus_path",
    type=click.Path(dir_okay=False),
    default=None,
    help="Corpus file to index; falls back to corpus_path in the config.",
)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option(
    "--format",
    "corpus_format",
    default="jsonl",
    type=click.Choice(["jsonl", "tsv"]),
    show_default=True,
)
@click.option(
    "--output",
    "output_path",
    required=True,
    type=click.Path(dir_okay=False),
    help="Where to write the index JSON.",
)
def index(
    corpus_path: str | None, config_path: str | None, corpus_format: str, output_path: str
) -> None:
    """Build a retrieval index from a corpus file."""
    with _exit_codes():
        config = load_config(config_path)
        corpus_path = corpus_path or config.corpus_path
        if corpus_path is None:
            raise ConfigError("no corpus file: pass --corpus or set corpus_path in the config")
        documents = ingest_corpus(corpus_path, format=corpus_format)
        idx = build_index(documents)
        save_index(idx, output_path)
        logger.info(
            "indexed corpus",
            extra={"documents": idx.doc_count, "avg_length": idx.avg_doc_length},
        )
        click.echo(
            f"indexed {idx.doc_count} documents "
            f"(avg length {idx.avg_doc_length:.1f} tokens) -> {output_path}"
        )


def _run_one_query(query, idx, backend, scorer, config, out_dir: Path) -> str:
    """Evolve one query, write its trace, and return a status label."""
    seeds = seed_population(idx, query, scorer, first_k=config.first_k, s=config.seed_count)
    if not seeds:
        logger.warning("no seeds retrieved, skipping", extra={"query_id": query.query_id})
        return "skipped"
    seed_docs = [idx.document(sd.doc_id) for sd in seeds]
    try:
        trace = evolve(query, seed_docs, backend, scorer, config.evolution)
    except IterationStarvationError as err:
        logger.error(str(err), extra={"query_id": query.query_id})
        return "failed"
    trace_path = out_dir / f"trace-{_safe_name(query.query_id)}.json"
    trace_path.write_text(trace.to_json(), encoding="utf-8")
    logger.info(
        "query done",
        extra={
            "query_id": query.query_id,
            "termination": trace.termination_reason,
            "generations": len(trace.generations),
        },
    )
    return trace.termination_reason


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option(
    "--queries",
    "queries_path",
    type=click.Path(dir_okay=False),
    default=None,
    help="Query file; falls back to queries_path in the config.",
)
@click.option(
    "--index",
    "index_path",
    required=True,
    type=click.Path(exists=True, dir_okay=False),
)
@_config_options
def run(
    config_path: str | None, queries_path: str | None, index_path: str, **kwargs: Any
) -> None:
    """Evolve an answer for every query and write one trace per query."""
    with _exit_codes():
        config = _apply_overrides(load_config(config_path), _collect_overrides(kwargs))
        queries_path = queries_path or config.queries_path
        if queries_path is None:
            raise ConfigError("no query file: pass --queries or set queries_path in the config")
        idx = load_index(index_path)
        queries = load_queries(queries_path)
        backend = build_backend(config)
        scorer = build_scorer(config)
        out_dir = Path(config.output_dir)
        out_dir.mkdir(parents=True, exist_ok=True)

        workers = config.evolution.parallelism
        if workers > 1 and len(queries) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                statuses = list(
                    pool.map(
                        lambda q: _run_one_query(q, idx, backend, scorer, config, out_dir),
                        queries,
                    )
                )
        else:
            statuses = [
                _run_one_query(q, idx, backend, scorer, config, out_dir) for q in queries
            ]
        counts = Counter(statuses)
        converged = counts["converged"]
        capped = counts["iteration_cap"]
        click.echo(
            f"evolved {converged + capped}/{len(queries)} queries "
            f"({converged} converged, {capped} hit the iteration cap, "
            f"{counts['skipped']} skipped, {counts['failed']} failed) -> {out_dir}"
        )
        if counts["failed"]:
            raise SystemExit(1)


@main.command("eval")
@click.option(
    "--traces",
    "traces_dir",
    required=True,
    type=click.Path(exists=True, file_okay=False),
    help="Directory of trace-*.json files from a run.",
)
@click.option(
    "--queries",
    "queries_path",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="Original query file; queries without traces are reported unevaluated.",
)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option(
    "--output-dir",
    "output_dir",
    default=None,
    help="Where to write report.{json,tsv,md}; defaults to the config output_dir.",
)
@click.option("--label", default="run", show_default=True, help="Row label in rendered tables.")
@click.option("--epsilon", type=float, default=None, help="Preference tie margin.")
def eval_command(
    traces_dir: str,
    queries_path: str | None,
    config_path: str | None,
    output_dir: str | None,
    label: str,
    epsilon: float | None,
) -> None:
    """Judge run traces: grounding verdicts and preference vs the baseline.

    Writes the report in all three formats (json, tsv, markdown).
    """
    with _exit_codes():
        config = load_config(config_path)
        judge = build_judge(config)
        verifier = build_verifier(config)
        fitness_name = build_scorer(config).name

        traces = []
        for path in sorted(Path(traces_dir).glob("trace-*.json")):
            try:
                traces.append(EvolutionTrace.from_json(path.read_text(encoding="utf-8")))
            except (ValueError, KeyError) as err:
                raise EvoAnswerError(f"cannot parse trace file {path.name}: {err}") from err
        if not traces:
            raise EvoAnswerError(f"no trace-*.json files in {traces_dir}")
        expected = None
        queries_path = queries_path or config.queries_path
        if queries_path is not None:
            expected = [q.query_id for q in load_queries(queries_path)]

        kwargs: dict[str, Any] = {"label": label}
        if epsilon is not None:
            kwargs["epsilon"] = epsilon
        report = evaluate_traces(
            traces,
            judge,
            verifier,
            expected_query_ids=expected,
            fitness_scorer_name=fitness_name,
            **kwargs,
        )
        out_dir = Path(output_dir if output_dir is not None else config.output_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        for fmt, suffix in (("json", "json"), ("tsv", "tsv"), ("markdown", "md")):
            (out_dir / f"report.{suffix}").write_text(
                emit_report(report, fmt), encoding="utf-8"
            )
        click.echo(
            f"evaluated {len(report.rows)} queries: accuracy {report.accuracy:.3f}, "
            f"preferred {report.plus_count}, tied {report.equal_count}, "
            f"not preferred {report.minus_count}, "
            f"unevaluated {len(report.unevaluated)} -> {out_dir}"
        )


@main.command()
@click.option(
    "--input",
    "input_path",
    required=True,
    type=click.Path(exists=True, dir_okay=False),
    help="JSON report produced by eval.",
)
@click.option(
    "--format",
    "report_format",
    default="markdown",
    type=click.Choice(["json", "tsv", "markdown"]),
    show_default=True,
)
@click.option("--output", "output_path", type=click.Path(dir_okay=False), default=None)
def report(input_path: str, report_format: str, output_path: str | None) -> None:
    """Re-render a JSON evaluation report as tsv or markdown."""
    with _exit_codes():
        try:
            data = json.loads(Path(input_path).read_text(encoding="utf-8"))
            loaded = EvalReport.from_dict(data)
        except (ValueError, KeyError) as err:
            raise EvoAnswerError(f"cannot parse report {input_path}: {err}") from err
        rendered = emit_report(loaded, report_format)
        if output_path is None:
            click.echo(rendered, nl=False)
        else:
            Path(output_path).write_text(rendered, encoding="utf-8")
            click.echo(f"wrote {report_format} report -> {output_path}")


if __name__ == "__main__":
    main()
