"""fallguard command line: generate, train, evaluate, run, test-alert."""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import signal
import sys
import threading
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import simgen
from ._accel import backend_name
from .alerting import (
    TOKEN_ENV,
    AlertError,
    AlertMessage,
    CooldownGate,
    DryRunSink,
    TelegramSink,
    alert_pipeline,
    dispatch,
    format_caption,
    render_snapshot,
)
from .classify import (
    FormatError,
    evaluate,
    load_model,
    predict,
    save_model,
    stratified_split_indices,
    train_knn,
    train_random_forest,
)
from .config import AppConfig, ConfigError, default_config_json, load_config
from .fall_monitor import FallEvent, FallMonitor
from .features import Rejected, extract, to_matrix
from .pose_stream import (
    DecodeError,
    LandmarkFrame,
    PoseLabel,
    class_counts,
    load_dataset,
    open_source,
    parse_speed,
    read_stream,
    replay,
    write_dataset,
    write_stream,
)

logger = logging.getLogger("fallguard")


def _json_value(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


class EventLog:
    """Thread-safe JSON-lines writer; records carry no wall-clock data."""

    def __init__(self, path: str | None):
        self._lock = threading.Lock()
        if path is None:
            self._fh, self._owned = None, False
        elif path == "-":
            self._fh, self._owned = sys.stdout, False
        else:
            self._fh, self._owned = open(path, "w"), True

    def write(self, record: dict) -> None:
        if self._fh is None:
            return
        line = json.dumps({k: _json_value(v) for k, v in record.items()}, sort_keys=True)
        with self._lock:
            self._fh.write(line + "\n")
            self._fh.flush()

    def close(self):
        if self._owned:
            self._fh.close()


# --------------------------------------------------------------------------
# helpers


def _write_text(path: str, writer) -> None:
    try:
        with open(path, "w") as fh:
            writer(fh)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from None


def _read_dataset(path: str):
    try:
        with open(path, "rb") as fh:
            return load_dataset(fh)
    except OSError as exc:
        raise OSError(f"cannot read dataset {path}: {exc.strerror}") from None


def _read_model(path: str):
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise OSError(f"cannot read model {path}: {exc.strerror}") from None
    return load_model(data)


def _make_sink(cfg: AppConfig, sink_name: str | None = None):
    name = sink_name or cfg.alert.sink
    if name == "dryrun":
        return DryRunSink(cfg.alert.dryrun_dir)
    token = os.environ.get(TOKEN_ENV) or cfg.alert.bot_token
    if not token:
        raise ConfigError(f"telegram sink needs a bot token: set {TOKEN_ENV} or alert.bot_token")
    if not cfg.alert.chat_id:
        raise ConfigError("telegram sink needs alert.chat_id")
    return TelegramSink(
        token,
        cfg.alert.chat_id,
        api_base_url=cfg.alert.api_base_url,
        timeout_secs=cfg.alert.timeout_secs,
    )


def _fall_template_frame(t: float = 0.0) -> LandmarkFrame:
    xy = simgen.load_templates()[PoseLabel.POSE6]
    return LandmarkFrame(t, np.concatenate([xy, np.ones((xy.shape[0], 1))], axis=1))


# --------------------------------------------------------------------------
# commands


def cmd_generate(args, cfg: AppConfig) -> int:
    seed = cfg.seed if args.seed is None else args.seed
    if args.scenario:
        with open(args.scenario) as fh:
            script = simgen.ScenarioScript.from_dict(json.load(fh))
        scenario = simgen.generate_scenario(script, seed)
        _write_text(args.out, lambda fh: write_stream(scenario.frames, fh))
        ann_path = args.annotations or f"{args.out}.annotations.json"
        _write_text(ann_path, lambda fh: simgen.write_annotations(scenario.annotations, fh))
        print(f"wrote {len(scenario.frames)} frames to {args.out}, annotations to {ann_path}")
        return 0
    samples = simgen.generate_dataset(args.per_class, seed)
    _write_text(args.out, lambda fh: write_dataset(samples, fh))
    counts = class_counts(samples)
    print(f"wrote {len(samples)} samples to {args.out}")
    for label in PoseLabel:
        print(f"  {label}: {counts[label]}")
    return 0


def _split(samples, cfg: AppConfig, seed: int):
    X, y = to_matrix(samples)
    train_idx, test_idx = stratified_split_indices(y, cfg.model.test_fraction, seed)
    return X[train_idx], y[train_idx], X[test_idx], y[test_idx]


def cmd_train(args, cfg: AppConfig) -> int:
    seed = cfg.seed if args.seed is None else args.seed
    model_type = args.type or cfg.model.type
    samples = _read_dataset(args.dataset)
    Xtr, ytr, Xte, yte = _split(samples, cfg, seed)
    if model_type == "rf":
        rf = cfg.model.rf.model_copy()
        if args.n_trees is not None:
            rf.n_trees = args.n_trees
        if args.max_depth is not None:
            rf.max_depth = args.max_depth
        model = train_random_forest(Xtr, ytr, rf.params(), seed=seed)
        params = rf.model_dump()
    else:
        k = args.k if args.k is not None else cfg.model.k
        model = train_knn(Xtr, ytr, k=k)
        params = {"k": k}
    out = args.out or args.model or cfg.model.path
    try:
        Path(out).write_bytes(save_model(model))
    except OSError as exc:
        raise OSError(f"cannot write model {out}: {exc.strerror}") from None
    _, train_metrics = evaluate(model, Xtr, ytr)
    _, test_metrics = evaluate(model, Xte, yte)
    report = {
        "model": model_type,
        "params": params,
        "seed": seed,
        "samples": len(samples),
        "train_size": int(len(ytr)),
        "test_size": int(len(yte)),
        "train_accuracy": train_metrics.accuracy,
        "test": {k: v for k, v in test_metrics.to_dict().items() if k != "per_class"},
        "model_path": out,
    }
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    _write_text(f"{out}.report.json", lambda fh: fh.write(text))
    sys.stdout.write(text)
    return 0


def cmd_evaluate(args, cfg: AppConfig) -> int:
    seed = cfg.seed if args.seed is None else args.seed
    model = _read_model(args.model or cfg.model.path)
    samples = _read_dataset(args.dataset)
    _, _, Xte, yte = _split(samples, cfg, seed)
    cm, m = evaluate(model, Xte, yte)
    kind = "rf" if hasattr(model, "trees") else "knn"
    print(f"{'model':<8}{'accuracy':>10}{'precision':>11}{'recall':>9}{'f1':>8}{'n':>7}")
    print(f"{kind:<8}{m.accuracy:>10.4f}{m.precision:>11.4f}{m.recall:>9.4f}{m.f1:>8.4f}{cm.total:>7d}")
    if args.out:
        _write_text(args.out, lambda fh: fh.write(cm.to_csv()))
        print(f"confusion matrix written to {args.out}")
    else:
        sys.stdout.write(cm.to_csv())
    return 0


class _Dispatcher:
    """Runs alert_pipeline inline (dry run) or on one background worker."""

    def __init__(self, cfg: AppConfig, sink, log: EventLog):
        self.gate = CooldownGate(cfg.alert.cooldown_secs)
        self.sink = sink
        self.log = log
        self.size = (cfg.alert.snapshot_width, cfg.alert.snapshot_height)
        self.sent = 0
        self.failed = 0
        self._pool = ThreadPoolExecutor(max_workers=1) if sink.name == "telegram" else None

    def _run(self, event: FallEvent, frame_no: int):
        try:
            receipt = alert_pipeline(event, event.trigger_frame, self.gate, self.sink, size=self.size)
        except AlertError as exc:
            self.failed += 1
            logger.error("alert dispatch failed: %s", exc)
            self.log.write({"type": "alert", "frame": frame_no, "t": event.confirmed_at, "status": "failed", "error": str(exc)})
            return
        if receipt is None:
            self.log.write({"type": "alert", "frame": frame_no, "t": event.confirmed_at, "status": "suppressed"})
        else:
            self.sent += 1
            self.log.write({"type": "alert", "frame": frame_no, "t": event.confirmed_at, "status": "sent", "receipt": receipt.to_dict()})

    def submit(self, event: FallEvent, frame_no: int):
        if self._pool is None:
            self._run(event, frame_no)
        else:
            self._pool.submit(self._run, event, frame_no)

    def close(self):
        if self._pool is not None:
            self._pool.shutdown(wait=True)


def cmd_run(args, cfg: AppConfig) -> int:
    if args.source:
        cfg.stream.source = args.source
    if args.speed is not None:
        cfg.stream.speed = args.speed
    model = _read_model(args.model or cfg.model.path)
    sink = _make_sink(cfg, args.sink)
    monitor = FallMonitor(cfg.monitor.detector())
    log = EventLog(cfg.logging.event_log_path)
    dispatcher = _Dispatcher(cfg, sink, log)
    fmin, fcount = cfg.features.min_visibility, cfg.features.min_visible_count

    def _terminate(signum, _frame):
        raise KeyboardInterrupt

    previous_term = signal.signal(signal.SIGTERM, _terminate) if threading.current_thread() is threading.main_thread() else None
    n = events = 0
    status, code = "completed", 0
    source = None
    try:
        source = open_source(cfg.stream.source)
        for frame in replay(read_stream(source), cfg.stream.speed_value):
            fv = extract(frame, fmin, fcount)
            if isinstance(fv, Rejected):
                label, conf, fv = None, 0.0, None
            else:
                label, conf = predict(model, fv)
            before = monitor.state.phase
            event = monitor.step(label, conf, frame, fv)
            after = monitor.state.phase
            if after is not before:
                log.write({
                    "type": "transition", "frame": n, "t": frame.timestamp,
                    "from": before.value, "to": after.value,
                    "label": str(label) if label is not None else None,
                    "confidence": conf, "motion": monitor.state.motion_value,
                })
            if event is not None:
                events += 1
                log.write({
                    "type": "fall_event", "frame": n, "t": event.confirmed_at,
                    "held_since": event.held_since, "motion": event.motion_value,
                })
                dispatcher.submit(event, n)
            n += 1
    except KeyboardInterrupt:
        status = "interrupted"
        logger.info("interrupted, shutting down")
    except (DecodeError, OSError) as exc:
        status, code = "error", 1
        logger.error("stream failed after %d frames: %s", n, exc)
        log.write({"type": "error", "frame": n, "error": str(exc)})
        print(f"fallguard: error: stream failed: {exc}", file=sys.stderr)
    finally:
        dispatcher.close()
        if source is not None and source is not sys.stdin.buffer:
            source.close()
        if previous_term is not None:
            signal.signal(signal.SIGTERM, previous_term)
    log.write({"type": "summary", "status": status, "frames": n, "events": events, "alerts_sent": dispatcher.sent, "alerts_failed": dispatcher.failed})
    log.close()
    if code == 0:
        print(f"processed {n} frames: {events} fall event(s), {dispatcher.sent} alert(s) sent", file=sys.stderr)
    return code


def cmd_test_alert(args, cfg: AppConfig) -> int:
    sink = _make_sink(cfg, args.sink)
    frame = _fall_template_frame()
    event = FallEvent(confirmed_at=3.1, held_since=0.0, motion_value=0.0, trigger_frame=frame)
    text = "[TEST] " + format_caption(event)
    size = (cfg.alert.snapshot_width, cfg.alert.snapshot_height)
    receipt = dispatch(AlertMessage(text, render_snapshot(frame, *size), event), sink)
    print(json.dumps(receipt.to_dict(), sort_keys=True))
    return 0


# --------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"fallguard: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON config file")
    common.add_argument("--seed", type=int, help="RNG seed (overrides config)")

    p = _Parser(prog="fallguard", description=__doc__)
    p.add_argument("--print-default-config", action="store_true", help="print the default config and exit")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    g = sub.add_parser("generate", parents=[common], help="write a synthetic dataset or scenario stream")
    g.add_argument("--per-class", type=int, default=600)
    g.add_argument("--scenario", metavar="SCRIPT", help="scenario script JSON; writes a frame stream instead")
    g.add_argument("--annotations", metavar="PATH", help="annotation sidecar path (scenario mode)")
    g.add_argument("--out", required=True, metavar="PATH")
    g.set_defaults(func=cmd_generate)

    t = sub.add_parser("train", parents=[common], help="train a classifier on a labeled dataset")
    t.add_argument("--dataset", required=True, metavar="PATH")
    t.add_argument("--type", choices=("rf", "knn"), help="model type")
    t.add_argument("--n-trees", type=int)
    t.add_argument("--max-depth", type=int)
    t.add_argument("--k", type=int)
    t.add_argument("--model", metavar="PATH", help="alias for --out")
    t.add_argument("--out", metavar="PATH", help="model output path")
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("evaluate", parents=[common], help="score a model on the held-out split")
    e.add_argument("--dataset", required=True, metavar="PATH")
    e.add_argument("--model", metavar="PATH")
    e.add_argument("--out", metavar="PATH", help="confusion matrix CSV path")
    e.set_defaults(func=cmd_evaluate)

    r = sub.add_parser("run", parents=[common], help="monitor a landmark stream and dispatch alerts")
    r.add_argument("--source", help='stream source: path, "-", or tcp://HOST:PORT')
    r.add_argument("--speed", type=_speed_arg, metavar="R|max", help="replay speed factor")
    r.add_argument("--sink", choices=("telegram", "dryrun"), help="alert sink (overrides config)")
    r.add_argument("--model", metavar="PATH", help="trained model file")
    r.set_defaults(func=cmd_run)

    a = sub.add_parser("test-alert", parents=[common], help="send a synthetic alert through the sink")
    a.add_argument("--sink", choices=("telegram", "dryrun"))
    a.set_defaults(func=cmd_test_alert)
    return p


def _speed_arg(text: str):
    try:
        speed = parse_speed(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid speed {text!r}: use a positive number or 'max'")
    return "max" if math.isinf(speed) else speed


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.print_default_config:
        sys.stdout.write(default_config_json())
        return 0
    if args.command is None:
        parser.print_usage(sys.stderr)
        print("fallguard: error: a command is required", file=sys.stderr)
        return 2
    try:
        cfg = load_config(args.config)
        logging.basicConfig(level=cfg.logging.level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
        logger.debug("kernel backend: %s", backend_name())
        return args.func(args, cfg)
    except ConfigError as exc:
        print(f"fallguard: config error: {exc}", file=sys.stderr)
        return 2
    except (DecodeError, FormatError, AlertError, OSError, ValueError) as exc:
        print(f"fallguard: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
