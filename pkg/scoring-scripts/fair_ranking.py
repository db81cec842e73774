"""
Fair-ranking evaluation toolkit command line.

Subcommands:
- evaluate: utility and group unfairness of run files, written as CSV and JSON reports
- tradeoff: one (utility, unfairness) row per run, for plotting
- seqgen:   sample evaluation query sequences by query frequency
- rerank:   produce a run file with one of the baseline rerankers
- validate: check a run file against queries (and the query sequences)
- groups:   bucket authors into groups by h-index or other thresholds
- synth:    write a synthetic two-group collection

Exit codes: 0 ok, 1 usage, 2 data format, 3 validation, 4 undefined metric.
"""

import argparse
import logging
import os
import sys
from typing import Any, Dict, List, Optional

from dotenv import load_dotenv

from utils.data_loaders import (
    file_label,
    load_author_statistics,
    load_corpus,
    load_groups,
    load_queries,
    missing_pool_documents,
    queries_by_id,
    write_corpus,
    write_groups,
    write_queries,
)
from utils.errors import DataIntegrityError, FairRankError, UsageError
from utils.eval_config import (
    DEFAULT_PARAMS,
    get_all_strategy_names,
    get_file_safe_name,
    get_max_workers,
    get_strategy_config,
    load_params_file,
    resolve_strategy_name,
    run_label,
)
from utils.groups import HINDEX_THRESHOLDS, group_from_thresholds
from utils.metrics import evaluate_sequences
from utils.model import Amortization, EvalParams
from utils.rerankers import rerank_sequences
from utils.reports import ReportRow, print_evaluation_summary, write_csv_report, write_reports
from utils.run_files import load_run, load_sequences, records_from_sequences, write_run, write_sequences
from utils.sequence_generator import generate_sequences, sequence_metadata, to_query_sequences
from utils.synthetic import make_synthetic_collection, make_tradeoff_fixture
from utils.tradeoff import tradeoff_points
from utils.validators import validate_run

load_dotenv()

logger = logging.getLogger(__name__)

TRACK = 'TREC 2019 Fair Ranking Track'


class ToolkitArgumentParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with code 1."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def setup_logging(log_file: Optional[str], verbose: bool = False):
    """Send logs to `log_file` (append) at INFO, or to stderr at WARNING (INFO with --verbose)."""
    log_format = '%(asctime)s - [%(threadName)s] - %(levelname)s - %(message)s'
    if log_file:
        os.makedirs(os.path.dirname(os.path.abspath(log_file)), exist_ok=True)
        logging.basicConfig(filename=log_file, level=logging.INFO, format=log_format, filemode='a', force=True)
    else:
        logging.basicConfig(
            stream=sys.stderr, level=logging.INFO if verbose else logging.WARNING, format=log_format, force=True
        )
    return logging.getLogger(__name__)


def pick(value: Any, defaults: Dict[str, Any], key: str) -> Any:
    """Flag value if given, else the (config-file or built-in) default."""
    return defaults[key] if value is None else value


def strategy_type(name: str) -> str:
    try:
        return resolve_strategy_name(name)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def eval_params(args, defaults: Dict[str, Any]) -> EvalParams:
    return EvalParams(
        gamma=pick(args.gamma, defaults, 'gamma'),
        stop_coefficient=pick(args.stop_coef, defaults, 'stop_coefficient'),
        amortization=pick(getattr(args, 'amortization', None), defaults, 'amortization'),
    )


def load_collection(args, need_corpus: bool = True):
    """Load queries (and the corpus), checking that every pool document has metadata."""
    requests = load_queries(args.queries)
    print(f"✓ Loaded {len(requests)} queries from {args.queries}")
    documents = None
    if need_corpus:
        documents = load_corpus(args.corpus)
        print(f"✓ Loaded {len(documents)} documents from {args.corpus}")
        missing = missing_pool_documents(documents, requests)
        if missing:
            shown = ', '.join(missing[:5]) + (f" ... and {len(missing) - 5} more" if len(missing) > 5 else '')
            raise DataIntegrityError(f"{len(missing)} pool document(s) have no corpus entry: {shown}", args.corpus)
    return queries_by_id(requests), documents


def print_violations(report, limit: int = 20):
    print(f"✗ {len(report.violations)} violation(s) in {report.rankings_checked} rankings:")
    for violation in report.violations[:limit]:
        print(f"  - {violation}")
    if len(report.violations) > limit:
        print(f"  ... and {len(report.violations) - limit} more")


def cmd_evaluate(args, defaults: Dict[str, Any]) -> int:
    params = eval_params(args, defaults)
    queries, documents = load_collection(args)
    group_defs = [(file_label(path), load_groups(path)) for path in args.groups]
    expected = load_sequences(args.sequences) if args.sequences else None
    max_workers = get_max_workers()

    rows: List[ReportRow] = []
    for run_path in args.runs:
        run = load_run(run_path)
        label = file_label(run_path)
        report = validate_run(run, queries, expected, args.allow_partial)
        if not report.is_admissible:
            print(f"✗ {run_path} is not admissible")
            print_violations(report)
            return 3
        print(f"✓ {run_path}: {report.rankings_checked} rankings in {report.sequences_checked} sequence(s) validated")
        for group_label, groups in group_defs:
            result = evaluate_sequences(
                list(run.values()), queries, documents, groups, params, args.unknown_as_group, max_workers
            )
            rows.append(ReportRow(label, group_label, result))

    outputs = write_reports(args.out, rows, params, {'unknown_as_group': args.unknown_as_group})
    print_evaluation_summary(rows, params, outputs, logger)
    return 4 if any(not row.result.is_defined for row in rows) else 0


def cmd_tradeoff(args, defaults: Dict[str, Any]) -> int:
    if not args.runs:
        raise UsageError("tradeoff needs at least one run file")
    params = eval_params(args, defaults)
    queries, documents = load_collection(args)
    runs = [(file_label(path), list(load_run(path).values())) for path in args.runs]
    max_workers = get_max_workers()

    rows: List[ReportRow] = []
    for path in args.groups:
        group_label = file_label(path)
        points = tradeoff_points(
            runs, queries, documents, load_groups(path), params, args.unknown_as_group, max_workers
        )
        rows.extend(ReportRow(point.label, group_label, point.result) for point in points)

    write_csv_report(args.out, rows)
    print_evaluation_summary(rows, params, [args.out], logger)
    return 4 if any(not row.result.is_defined for row in rows) else 0


def cmd_seqgen(args, defaults: Dict[str, Any]) -> int:
    n_sequences = pick(args.n_sequences, defaults, 'n_sequences')
    length = pick(args.length, defaults, 'sequence_length')
    seed = pick(args.seed, defaults, 'seed')
    requests = load_queries(args.queries)
    print(f"✓ Loaded {len(requests)} queries from {args.queries}")

    qid_lists = generate_sequences(requests, n_sequences, length, seed, get_max_workers())
    write_sequences(args.out, to_query_sequences(qid_lists), sequence_metadata(n_sequences, length, seed, len(requests)))
    print(f"✓ Wrote {n_sequences} sequence(s) of {length} queries to {args.out} (seed {seed})")
    return 0


def cmd_rerank(args, defaults: Dict[str, Any]) -> int:
    try:
        strategy = resolve_strategy_name(pick(args.strategy, defaults, 'strategy'))
    except ValueError as e:
        raise UsageError(str(e)) from None
    lam = pick(args.lam, defaults, 'lambda')
    seed = pick(args.seed, defaults, 'seed')
    params = eval_params(args, defaults)
    config = get_strategy_config(strategy)

    groups = None
    if config['uses_groups']:
        if not args.groups:
            raise UsageError(f"--groups is required for strategy '{strategy}'")
        groups = load_groups(args.groups)

    queries, documents = load_collection(args)
    sequences = load_sequences(args.sequences)
    label = run_label(strategy, lam)
    out = args.out or os.path.join('..', 'results', 'runs', f"{get_file_safe_name(label)}.jsonl")

    print(f"\n{'='*60}")
    print(f"Reranking with {config['display_name']} ({label})")
    print(f"{'='*60}\n")
    ranked = rerank_sequences(
        list(sequences.values()), queries, documents, params, strategy, groups, lam, seed, get_max_workers()
    )
    write_run(out, records_from_sequences(ranked))
    total = sum(len(sequence) for sequence in ranked)
    print(f"✓ Wrote {total} rankings in {len(ranked)} sequence(s) to {out}")
    return 0


def cmd_validate(args, defaults: Dict[str, Any]) -> int:
    queries, _ = load_collection(args, need_corpus=False)
    expected = load_sequences(args.sequences) if args.sequences else None
    run = load_run(args.run)
    report = validate_run(run, queries, expected, args.allow_partial)
    if not report.is_admissible:
        print_violations(report)
        return 3
    print(f"✓ {args.run}: {report.rankings_checked} rankings in {report.sequences_checked} sequence(s) are admissible")
    return 0


def cmd_groups(args, defaults: Dict[str, Any]) -> int:
    values = load_author_statistics(args.stats, args.column)
    thresholds = args.thresholds or list(HINDEX_THRESHOLDS)
    groups = group_from_thresholds(values, thresholds, args.stat_name)
    write_groups(args.out, groups)
    print(f"✓ Assigned {len(groups)} authors to {len(groups.universe)} groups; wrote {args.out}")
    for label in sorted(groups.universe):
        print(f"  {label}: {len(groups.authors_in(label))} authors")
    return 0


def cmd_synth(args, defaults: Dict[str, Any]) -> int:
    seed = pick(args.seed, defaults, 'seed')
    if args.fixture == 'tradeoff':
        collection = make_tradeoff_fixture(args.n_queries)
    else:
        collection = make_synthetic_collection(args.n_queries, args.pool_size, seed)
    os.makedirs(args.out_dir, exist_ok=True)
    write_corpus(os.path.join(args.out_dir, 'corpus.jsonl'), collection.documents.values())
    write_queries(os.path.join(args.out_dir, 'queries.jsonl'), collection.queries)
    write_groups(os.path.join(args.out_dir, 'groups.csv'), collection.groups)
    print(f"✓ Wrote {len(collection.queries)} queries, {len(collection.documents)} documents "
          f"and {len(collection.groups)} group assignments to {args.out_dir}")
    return 0


def add_model_flags(parser: argparse.ArgumentParser):
    parser.add_argument(
        '--gamma',
        type=float,
        default=None,
        help=f"Continuation probability of the cascade browsing model "
             f"(default: {DEFAULT_PARAMS['gamma']}, the {TRACK} evaluation setting)"
    )
    parser.add_argument(
        '--stop-coef',
        type=float,
        default=None,
        help=f"Stop probability coefficient c in p(s|d) = c * r_d "
             f"(default: {DEFAULT_PARAMS['stop_coefficient']}, the {TRACK} evaluation setting)"
    )


def add_data_flags(parser: argparse.ArgumentParser, corpus: bool = True):
    parser.add_argument(
        '--queries',
        required=True,
        help='Query JSON-lines file with reranking pools (and relevance, for evaluation)'
    )
    if corpus:
        parser.add_argument(
            '--corpus',
            required=True,
            help='Corpus JSON-lines file, plain or gzip (S2 paper records)'
        )


def add_eval_flags(parser: argparse.ArgumentParser):
    add_data_flags(parser)
    parser.add_argument(
        '--groups',
        action='append',
        required=True,
        help='Group definition file (CSV author_id,group_id or JSON-lines); repeat for several definitions'
    )
    add_model_flags(parser)
    parser.add_argument(
        '--amortization',
        choices=[mode.value for mode in Amortization],
        default=None,
        help=f"micro: one accumulator over all rankings; macro: unweighted mean over distinct queries "
             f"(default: {DEFAULT_PARAMS['amortization']}; the {TRACK} reports both)"
    )
    parser.add_argument(
        '--unknown-as-group',
        action='store_true',
        help="Count authors without a group in an extra 'unknown' group instead of leaving them out"
    )


def build_parser() -> argparse.ArgumentParser:
    common = ToolkitArgumentParser(add_help=False)
    common.add_argument(
        '--config',
        default=None,
        help='JSON file overriding built-in parameter defaults (e.g. ../config/default_params.json)'
    )
    common.add_argument(
        '--log-file',
        default=None,
        help='Append logs to this file instead of stderr'
    )
    common.add_argument(
        '--verbose',
        action='store_true',
        help='Log progress at INFO level on stderr'
    )

    parser = ToolkitArgumentParser(
        description='Exposure-based fairness and utility evaluation of ranking sequences'
    )
    subparsers = parser.add_subparsers(dest='command', metavar='command')
    subparsers.required = True

    evaluate = subparsers.add_parser('evaluate', parents=[common], help='Evaluate run files')
    evaluate.add_argument('runs', nargs='+', help='Run files (JSON-lines q_num, qid, ranking)')
    add_eval_flags(evaluate)
    evaluate.add_argument(
        '--sequences',
        default=None,
        help='Query sequence file (CSV q_num,qid) the runs must follow'
    )
    evaluate.add_argument(
        '--allow-partial',
        action='store_true',
        help='Do not treat omitted queries as violations'
    )
    evaluate.add_argument(
        '--out',
        default='../results/evaluation',
        help='Report path prefix; writes <prefix>.csv and <prefix>.json (default: ../results/evaluation)'
    )
    evaluate.set_defaults(handler=cmd_evaluate)

    tradeoff = subparsers.add_parser('tradeoff', parents=[common], help='Utility/unfairness points per run')
    tradeoff.add_argument('runs', nargs='*', help='Run files to compare')
    add_eval_flags(tradeoff)
    tradeoff.add_argument(
        '--out',
        default='../results/tradeoff.csv',
        help='CSV with columns run,utility,unfairness,mode,group_def (default: ../results/tradeoff.csv)'
    )
    tradeoff.set_defaults(handler=cmd_tradeoff)

    seqgen = subparsers.add_parser('seqgen', parents=[common], help='Sample evaluation query sequences')
    add_data_flags(seqgen, corpus=False)
    seqgen.add_argument(
        '--n-sequences',
        type=int,
        default=None,
        help=f"Number of sequences (default: {DEFAULT_PARAMS['n_sequences']}, as in the {TRACK} evaluation)"
    )
    seqgen.add_argument(
        '--length',
        type=int,
        default=None,
        help=f"Queries per sequence (default: {DEFAULT_PARAMS['sequence_length']}, as in the {TRACK} evaluation)"
    )
    seqgen.add_argument(
        '--seed',
        type=int,
        default=None,
        help=f"Seed; sequence i draws from PCG64(SeedSequence([seed, i])) (default: {DEFAULT_PARAMS['seed']})"
    )
    seqgen.add_argument(
        '--out',
        default='../results/sequences.csv',
        help='Sequence CSV (q_num,qid); metadata goes to <out>.meta.json (default: ../results/sequences.csv)'
    )
    seqgen.set_defaults(handler=cmd_seqgen)

    rerank = subparsers.add_parser('rerank', parents=[common], help='Rerank query sequences into a run file')
    add_data_flags(rerank)
    rerank.add_argument(
        '--sequences',
        required=True,
        help='Query sequence file (CSV q_num,qid) to rerank'
    )
    rerank.add_argument(
        '--strategy',
        type=strategy_type,
        default=None,
        help=f"One of {', '.join(get_all_strategy_names())} (default: {DEFAULT_PARAMS['strategy']})"
    )
    rerank.add_argument(
        '--lambda',
        dest='lam',
        type=float,
        default=None,
        help=f"Controller fairness weight in [0, 1]; 0 ranks by predicted relevance only "
             f"(default: {DEFAULT_PARAMS['lambda']}, a toolkit choice; the {TRACK} fixes no value)"
    )
    rerank.add_argument(
        '--groups',
        default=None,
        help='Group definition file; required by the controller'
    )
    rerank.add_argument(
        '--seed',
        type=int,
        default=None,
        help=f"Seed for the random strategy; sequence i uses stream (seed, i) (default: {DEFAULT_PARAMS['seed']})"
    )
    add_model_flags(rerank)
    rerank.add_argument(
        '--out',
        default=None,
        help='Run file to write (default: ../results/runs/<strategy>[-<lambda>].jsonl)'
    )
    rerank.set_defaults(handler=cmd_rerank)

    validate = subparsers.add_parser('validate', parents=[common], help='Check a run file')
    validate.add_argument('run', help='Run file to check')
    add_data_flags(validate, corpus=False)
    validate.add_argument(
        '--sequences',
        default=None,
        help='Query sequence file the run must follow'
    )
    validate.add_argument(
        '--allow-partial',
        action='store_true',
        help='Do not treat omitted queries as violations'
    )
    validate.set_defaults(handler=cmd_validate)

    groups = subparsers.add_parser('groups', parents=[common], help='Group authors by h-index or thresholds')
    groups.add_argument(
        '--stats',
        required=True,
        help='CSV with author_id and a per-author integer statistic'
    )
    groups.add_argument(
        '--column',
        default=None,
        help='Statistic column (default: first column after author_id)'
    )
    groups.add_argument(
        '--thresholds',
        type=int,
        nargs='+',
        default=None,
        help=f"Increasing cut points, left-closed (default: {' '.join(map(str, HINDEX_THRESHOLDS))}, "
             f"the h-index groups of the {TRACK} evaluation)"
    )
    groups.add_argument(
        '--stat-name',
        default='h',
        help='Statistic name used in group labels (default: h)'
    )
    groups.add_argument(
        '--out',
        default='../results/groups/hindex_groups.csv',
        help='Group CSV to write (default: ../results/groups/hindex_groups.csv)'
    )
    groups.set_defaults(handler=cmd_groups)

    synth = subparsers.add_parser('synth', parents=[common], help='Write a synthetic two-group collection')
    synth.add_argument(
        '--fixture',
        choices=['random', 'tradeoff'],
        default='random',
        help='random: seeded two-group collection; tradeoff: fixed controller fixture (default: random)'
    )
    synth.add_argument(
        '--n-queries',
        type=int,
        default=20,
        help='Number of queries (default: 20)'
    )
    synth.add_argument(
        '--pool-size',
        type=int,
        default=6,
        help='Documents per pool for the random fixture (default: 6)'
    )
    synth.add_argument(
        '--seed',
        type=int,
        default=None,
        help=f"Seed for the random fixture (default: {DEFAULT_PARAMS['seed']})"
    )
    synth.add_argument(
        '--out-dir',
        default='../results/synthetic',
        help='Directory for corpus.jsonl, queries.jsonl and groups.csv (default: ../results/synthetic)'
    )
    synth.set_defaults(handler=cmd_synth)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        setup_logging(args.log_file, args.verbose)
        defaults = load_params_file(args.config)
        return args.handler(args, defaults)
    except FairRankError as e:
        print(f"✗ {type(e).__name__}: {e}", file=sys.stderr)
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code


if __name__ == '__main__':
    sys.exit(main())
