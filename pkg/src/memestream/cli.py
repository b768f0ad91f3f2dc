"""Operator entry points.

    memestream gen     --tweets N --users M --seed S --themes FILE --out FILE
    memestream replay  --input FILE --themes FILE --state-dir DIR
    memestream serve   --themes FILE --port N [--input FILE] [--listen PORT]
    memestream export  --meme KIND:VALUE --format F --out FILE --state-dir DIR
    memestream stats   --meme KIND:VALUE --state-dir DIR

Exit codes: 0 success, 1 usage/config error, 2 runtime failure.
"""

from __future__ import annotations

import json
import logging
import sys
import threading
from pathlib import Path

import click

from . import analytics, gen as gen_mod, storage
from .annotations import DEFAULT_BOT_HANDLE
from .engine import Pipeline, PipelineConfig, meme_stats_obj, parse_meme_key
from .ingest import SocketLineSource, read_lines
from .themes import ConfigError, load_themes

logger = logging.getLogger(__name__)


class UsageFailure(click.ClickException):
    exit_code = 1


class RuntimeFailure(click.ClickException):
    exit_code = 2


def _load_themes_or_fail(path: str):
    if not Path(path).exists():
        raise UsageFailure(f"themes file not found: {path}")
    try:
        return load_themes(path)
    except ConfigError as exc:
        raise UsageFailure(f"bad themes file {path}: {exc}")


def _build_pipeline(
    state_dir: str | None,
    themes_file: str | None,
    lexicon: str | None,
    labels: str | None,
    definitions: str | None,
    bot_handle: str,
) -> Pipeline:
    themes = _load_themes_or_fail(themes_file) if themes_file else []
    lex = None
    if lexicon:
        try:
            lex = analytics.load_lexicon(lexicon)
        except (OSError, ValueError) as exc:
            raise UsageFailure(f"bad lexicon file: {exc}")
    user_labels = {}
    if labels:
        try:
            user_labels = analytics.load_user_labels(labels)
        except (OSError, ValueError) as exc:
            raise UsageFailure(f"bad labels file: {exc}")
    defs = {}
    if definitions:
        try:
            with open(definitions, "r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    obj = json.loads(line)
                    defs[f"{obj['kind']}:{obj['value']}"] = obj["definition"]
        except (OSError, ValueError, KeyError) as exc:
            raise UsageFailure(f"bad definitions file: {exc}")
    config = PipelineConfig(
        state_dir=state_dir,
        themes=themes,
        lexicon=lex,
        user_labels=user_labels,
        definitions=defs,
        bot_handle=bot_handle,
    )
    try:
        return Pipeline(config)
    except (storage.LogCorruption, OSError, ValueError) as exc:
        raise RuntimeFailure(f"cannot open state: {exc}")


def _print_summary(pipeline: Pipeline) -> None:
    stats = pipeline.ingest_stats
    click.echo(f"lines={stats.lines} parsed={stats.parsed} errors={stats.error_total}")
    click.echo(
        f"accepted={pipeline.accepted} unrouted={pipeline.unrouted} "
        f"duplicates={stats.duplicates} late={stats.late_dropped} truncated={stats.truncated}"
    )
    click.echo(f"memes_tracked={len(pipeline.meme_summaries)} users={len(pipeline.users)}")
    click.echo(f"state_digest={pipeline.state_digest()}")


@click.group()
def cli():
    """Meme tracking over tweet-like record streams."""


@cli.command()
@click.option("--tweets", type=int, required=True, help="number of records to generate")
@click.option("--users", type=int, required=True, help="size of the synthetic user pool")
@click.option("--seed", type=int, required=True, help="deterministic RNG seed")
@click.option("--themes", "themes_file", required=True, help="theme config used for keyword salting")
@click.option("--out", "out_path", required=True, help="corpus output path (ledger lands next to it)")
@click.option("--retweet-prob", type=float, default=0.3, show_default=True)
@click.option("--mention-rate", type=float, default=0.5, show_default=True)
@click.option("--url-prob", type=float, default=0.1, show_default=True)
@click.option("--salt-frac", type=float, default=0.2, show_default=True)
def gen(tweets, users, seed, themes_file, out_path, retweet_prob, mention_rate, url_prob, salt_frac):
    """Generate a deterministic synthetic corpus plus its ground-truth ledger."""
    themes = _load_themes_or_fail(themes_file)
    params = gen_mod.GenParams(
        tweets=tweets,
        users=users,
        seed=seed,
        retweet_prob=retweet_prob,
        mention_rate=mention_rate,
        url_prob=url_prob,
        salt_frac=salt_frac,
    )
    try:
        ledger = gen_mod.generate(params, themes, out_path)
    except ValueError as exc:
        raise UsageFailure(str(exc))
    totals = ledger["totals"]
    click.echo(
        f"wrote {totals['tweets']} records to {out_path} "
        f"(routed={totals['routed']} retweets={totals['retweets']} salted={totals['salted']})"
    )


@cli.command()
@click.option("--input", "input_path", required=True, help="corpus file to replay")
@click.option("--state-dir", required=True, help="state directory (created or recovered)")
@click.option("--themes", "themes_file", required=True, help="theme config file")
@click.option("--speed", type=float, default=0.0, show_default=True,
              help="pacing factor on recorded gaps; 0 = as fast as possible")
@click.option("--lexicon", default=None, help="sentiment lexicon (word<TAB>valence)")
@click.option("--labels", default=None, help="user label file (partisanship/language)")
@click.option("--bot-handle", default=DEFAULT_BOT_HANDLE, show_default=True)
def replay(input_path, state_dir, themes_file, speed, lexicon, labels, bot_handle):
    """Ingest a corpus into a state directory and exit (prints the state digest)."""
    if not Path(input_path).exists():
        raise UsageFailure(f"input file not found: {input_path}")
    pipeline = _build_pipeline(state_dir, themes_file, lexicon, labels, None, bot_handle)
    try:
        pipeline.ingest_lines(read_lines(input_path), speed)
    except OSError as exc:
        raise RuntimeFailure(f"replay failed: {exc}")
    finally:
        pipeline.close()
    _print_summary(pipeline)


@cli.command()
@click.option("--themes", "themes_file", required=True, help="theme config file")
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--input", "input_path", default=None, help="corpus to replay before serving")
@click.option("--speed", type=float, default=0.0, show_default=True)
@click.option("--listen", type=int, default=None, help="TCP port for live record intake")
@click.option("--state-dir", default=None, help="state directory (in-memory when omitted)")
@click.option("--lexicon", default=None)
@click.option("--labels", default=None)
@click.option("--definitions", default=None, help="static meme definition lookup file")
@click.option("--bot-handle", default=DEFAULT_BOT_HANDLE, show_default=True)
@click.option("--cors-origin", default=None, help="allowed dashboard origin")
def serve(themes_file, port, host, input_path, speed, listen, state_dir,
          lexicon, labels, definitions, bot_handle, cors_origin):
    """Replay and/or listen for records, then serve the API until signaled."""
    import uvicorn

    from .api import create_app

    pipeline = _build_pipeline(state_dir, themes_file, lexicon, labels, definitions, bot_handle)
    if input_path:
        if not Path(input_path).exists():
            pipeline.close()
            raise UsageFailure(f"input file not found: {input_path}")
        try:
            pipeline.ingest_lines(read_lines(input_path), speed)
        except OSError as exc:
            pipeline.close()
            raise RuntimeFailure(f"replay failed: {exc}")
        logger.info("replayed %s: %d accepted", input_path, pipeline.accepted)

    socket_source = None
    socket_thread = None
    if listen is not None:
        socket_source = SocketLineSource(listen)
        socket_source.start()
        socket_thread = threading.Thread(
            target=lambda: pipeline.ingest_lines(socket_source),
            name="socket-ingest",
            daemon=True,
        )
        socket_thread.start()

    app = create_app(pipeline, cors_origin)
    server = uvicorn.Server(uvicorn.Config(app, host=host, port=port, log_level="warning"))
    try:
        server.run()
    finally:
        if socket_source is not None:
            socket_source.stop()
        pipeline.close()


@cli.command()
@click.option("--meme", "meme_arg", required=True, help="KIND:VALUE, e.g. hashtag:tag001")
@click.option("--format", "fmt", type=click.Choice(storage.EXPORT_FORMATS), required=True)
@click.option("--out", "out_path", required=True)
@click.option("--state-dir", required=True)
@click.option("--labels", default=None)
def export(meme_arg, fmt, out_path, state_dir, labels):
    """Export one meme's diffusion network from a prior run's state."""
    key = _parse_meme_arg(meme_arg)
    pipeline = _open_state(state_dir, labels)
    try:
        net = pipeline.get_network(key)
        data = storage.export_network(net, fmt, pipeline.config.user_labels)
    except analytics.UnknownMeme:
        raise RuntimeFailure(f"meme {meme_arg!r} is not tracked in {state_dir}")
    finally:
        pipeline.close()
    Path(out_path).write_bytes(data)
    click.echo(f"wrote {len(data)} bytes to {out_path}")


@cli.command()
@click.option("--meme", "meme_arg", required=True, help="KIND:VALUE, e.g. hashtag:tag001")
@click.option("--state-dir", required=True)
def stats(meme_arg, state_dir):
    """Print one meme's dashboard statistics from a prior run's state."""
    key = _parse_meme_arg(meme_arg)
    pipeline = _open_state(state_dir, None)
    try:
        net = pipeline.get_network(key)
        row = meme_stats_obj(analytics.meme_stats(net))
    except analytics.UnknownMeme:
        raise RuntimeFailure(f"meme {meme_arg!r} is not tracked in {state_dir}")
    finally:
        pipeline.close()
    width = max(len(k) for k in row)
    for field in ("n_tweets", "n_users", "n_retweet_edges", "n_mention_edges",
                  "mean_degree", "lcc_size", "first_seen", "last_seen"):
        click.echo(f"{field:<{width}}  {row[field]}")
    click.echo(json.dumps(row, ensure_ascii=False, sort_keys=True))


def _parse_meme_arg(meme_arg: str):
    try:
        return parse_meme_key(meme_arg)
    except ValueError as exc:
        raise UsageFailure(str(exc))


def _open_state(state_dir: str, labels: str | None) -> Pipeline:
    if not Path(state_dir).is_dir():
        raise UsageFailure(f"state directory not found: {state_dir}")
    return _build_pipeline(state_dir, None, None, labels, None, DEFAULT_BOT_HANDLE)


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.UsageError as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        return 1
    except click.ClickException as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        return exc.exit_code
    except click.exceptions.Abort:
        return 1
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
