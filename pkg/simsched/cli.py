# 命令行入口: generate / analyze / envelope / verify / report
import argparse
import asyncio
import logging
import sys
from dataclasses import replace
from typing import Any, Dict, List, Optional

from shared.protocol import ExitCode, MachineKind, Mode
from shared.utils import dumps_canonical, setup_logging, write_text
from simsched import oracle
from simsched.config import OUTPUT_FORMATS, SimschedConfig
from simsched.core import c_of, ratio_s_envelope, sorted_desc
from simsched.errors import (
    BudgetExceededError, ConfigError, DimensionError, InfeasibleError, UnknownClaimError,
    UnsupportedError, ValidationError,
)
from simsched.instances import (
    DISTRIBUTIONS, Instance, gen_random, gen_rm_instance, gen_sar_unrelated, gen_tight_related,
    merge_fractional, parse_instance, serialize_instance,
)
from simsched.schedulers import (
    Schedule, load_vector, lpt, mcr, min_work_assignment, optimal_regular_fractional, parse_schedule,
    schedule_to_dict, uniform_fractional,
)
from simsched.verification import (
    CLAIMS, claim_params, render_report_text, render_reports_text, run_claims, table1_report,
)

logger = logging.getLogger("simsched.cli")

GENERATORS = ("rm", "tight-related", "sar-unrelated", "random")
SOURCES = ("lpt", "mcr", "uniform-fp", "regular-fp", "min-work", "makespan-min", "cover-max")


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="随机种子 (默认0)")
    common.add_argument("--budget", type=int, default=None, help="枚举状态上限 (默认10^7)")
    common.add_argument("--tol", type=float, default=None, help="相对容差")
    common.add_argument("--abs-tol", type=float, default=None, help="绝对容差")
    common.add_argument("--format", choices=OUTPUT_FORMATS, default=None, help="输出格式")
    common.add_argument("-o", "--output", default=None, help="输出文件, 默认stdout")
    common.add_argument("--config", default=None, help="JSON配置文件")
    common.add_argument("--log-level", default=None, help="日志级别")
    common.add_argument("--log-file", default=None, help="日志文件")
    common.add_argument("--workers", type=int, default=None, help="枚举线程数")
    common.add_argument("--timing", action="store_true", help="JSON中保留运行时间")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(prog="simsched", description="调度负载向量的同时逼近比分析")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", parents=[common], help="生成实例")
    p.add_argument("kind", choices=GENERATORS)
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--n", type=int, default=6)
    p.add_argument("--K", type=float, default=10.0)
    p.add_argument("--env", choices=[k.value for k in MachineKind], default=MachineKind.IDENTICAL.value)
    p.add_argument("--mode", choices=[k.value for k in Mode], default=Mode.NP.value)
    p.add_argument("--dist", choices=DISTRIBUTIONS, default="uniform-int")
    p.set_defaults(handler=cmd_generate)

    p = sub.add_parser("analyze", parents=[common], help="计算调度的 s(S), c(S)")
    p.add_argument("instance")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--schedule", help="调度JSON文件")
    group.add_argument("--source", choices=SOURCES, help="由算法或oracle产生调度")
    p.set_defaults(handler=cmd_analyze)

    p = sub.add_parser("envelope", parents=[common], help="前缀包络 f(1..m)")
    p.add_argument("instance")
    p.set_defaults(handler=cmd_envelope)

    p = sub.add_parser("verify", parents=[common], help="验证界")
    p.add_argument("claims", nargs="+", help=f"声明id或all: {', '.join(CLAIMS)}")
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--count", type=int, default=None, help="覆盖随机实例个数")
    p.add_argument("--samples", type=int, default=None, help="每个实例的可中断调度样本数")
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("report", parents=[common], help="表1区间报告")
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--instances", type=int, default=20)
    p.set_defaults(handler=cmd_report)
    return parser


def load_config(args: argparse.Namespace) -> SimschedConfig:
    """默认值 < 配置文件 < 环境变量 < 命令行"""
    config = SimschedConfig()
    if args.config:
        config = SimschedConfig.from_file(args.config, config)
    config = SimschedConfig.from_env(config)
    overrides: Dict[str, Any] = {
        "seed": args.seed,
        "budget": args.budget,
        "rel_eps": args.tol,
        "abs_eps": args.abs_tol,
        "output_format": args.format,
        "log_level": args.log_level,
        "log_file": args.log_file,
        "workers": args.workers,
        "samples": getattr(args, "samples", None),
    }
    return replace(config, **{k: v for k, v in overrides.items() if v is not None})


def _read(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return f.read()
    except OSError as e:
        raise ValidationError([f"cannot read {path}: {e}"]) from e


# ---- generate ----

def cmd_generate(args: argparse.Namespace, config: SimschedConfig) -> int:
    if args.kind == "rm":
        inst = gen_rm_instance(args.m)
    elif args.kind == "tight-related":
        inst = gen_tight_related(args.m)
    elif args.kind == "sar-unrelated":
        inst = gen_sar_unrelated(args.K)
    else:
        inst = gen_random(args.env, args.mode, args.m, args.n, seed=config.seed, dist=args.dist)
    logger.info(f"生成实例: {inst.label}")
    write_text(args.output, serialize_instance(inst, indent=2))
    return ExitCode.OK


# ---- analyze ----

def _schedule_from_source(inst: Instance, source: str, config: SimschedConfig):
    budget = config.enumeration_budget()
    if source == "lpt":
        return inst, lpt(inst)
    if source == "mcr":
        return inst, mcr(inst)
    if source == "uniform-fp":
        return inst, uniform_fractional(inst)
    if source == "regular-fp":
        if inst.mode is not Mode.FP:
            raise UnsupportedError("regular-fp needs a fractional instance")
        merged = merge_fractional(inst) if inst.n > 1 else inst
        return merged, optimal_regular_fractional(merged.env.speeds)
    if source == "min-work":
        return inst, min_work_assignment(inst)
    if source == "makespan-min":
        return inst, oracle.brute_makespan_min(inst, budget).schedule
    return inst, oracle.brute_cover_max(inst, budget).schedule


def analyze(inst: Instance, sched: Schedule, config: SimschedConfig) -> Dict[str, Any]:
    budget = config.enumeration_budget()
    loads = load_vector(sched, inst, config.tolerance())
    envelope = oracle.envelope_for(inst, budget)
    floor = oracle.floor_for(inst, budget)
    s_report = ratio_s_envelope(loads, envelope)
    c_report = c_of(loads, floor)
    return {
        "instance": inst.label,
        "loads": list(loads.loads),
        "sorted_loads": list(sorted_desc(loads).loads),
        "s": s_report.to_dict(),
        "c": c_report.to_dict(),
        "envelope": envelope.to_dict(),
        "schedule": schedule_to_dict(sched),
    }


def cmd_analyze(args: argparse.Namespace, config: SimschedConfig) -> int:
    inst = parse_instance(_read(args.instance))
    if args.schedule:
        sched = parse_schedule(_read(args.schedule))
        source = "file"
    else:
        inst, sched = _schedule_from_source(inst, args.source, config)
        source = args.source
    result = {"source": source, **analyze(inst, sched, config)}
    if config.output_format == "text":
        text = (f"s = {result['s']['value']:.12g} (i={result['s']['witness_index']})\n"
                f"c = {result['c']['value']:.12g} (i={result['c']['witness_index']})\n"
                f"loads = {result['loads']}")
    else:
        text = dumps_canonical(result)
    write_text(args.output, text)
    return ExitCode.OK


# ---- envelope ----

def cmd_envelope(args: argparse.Namespace, config: SimschedConfig) -> int:
    inst = parse_instance(_read(args.instance))
    envelope = oracle.envelope_for(inst, config.enumeration_budget())
    if config.output_format == "text":
        text = f"{envelope.provenance.value}: " + ", ".join(f"{v:.12g}" for v in envelope.f)
    else:
        text = dumps_canonical(envelope.to_dict())
    write_text(args.output, text)
    return ExitCode.OK


# ---- verify ----

def _claim_names(requested: List[str]) -> List[str]:
    if "all" in requested:
        return list(CLAIMS)
    for name in requested:
        if name not in CLAIMS:
            raise UnknownClaimError(name)
    return list(requested)


def cmd_verify(args: argparse.Namespace, config: SimschedConfig) -> int:
    names = _claim_names(args.claims)
    strict = "all" not in args.claims
    params: Dict[str, Dict[str, Any]] = {}
    for name in names:
        entry = claim_params(name, args.m, strict=strict)
        if args.count is not None:
            entry["count"] = args.count
        if name == "pm_pp_one":
            entry["samples"] = config.samples
        if name == "q_fp_formula":
            entry["samples"] = config.fractional_samples
        params[name] = entry

    reports = asyncio.run(run_claims(names, params, config.seed, config.enumeration_budget(),
                                     config.tolerance()))
    if config.output_format == "text":
        text = render_reports_text(reports)
    else:
        text = "\n".join(r.to_json(with_timing=args.timing) for r in reports)
    write_text(args.output, text)
    failed = [r.claim for r in reports if not r.passed]
    if failed:
        logger.error(f"未通过: {failed}")
        return ExitCode.CLAIM_FAILED
    return ExitCode.OK


# ---- report ----

def cmd_report(args: argparse.Namespace, config: SimschedConfig) -> int:
    report = table1_report(args.m, config.seed, config.enumeration_budget(), instances=args.instances)
    if config.output_format == "text":
        text = render_report_text(report)
    else:
        text = dumps_canonical(report, indent=2)
    write_text(args.output, text)
    return ExitCode.OK


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args)
    except ConfigError as e:
        print(f"配置错误: {e}", file=sys.stderr)
        return ExitCode.BAD_INPUT
    setup_logging("simsched", config.log_level, config.log_file)

    try:
        return int(args.handler(args, config))
    except (ValidationError, ConfigError, UnknownClaimError, DimensionError, InfeasibleError) as e:
        logger.error(f"输入错误: {e}")
        return ExitCode.BAD_INPUT
    except UnsupportedError as e:
        logger.error(f"不支持: {e}")
        return ExitCode.UNSUPPORTED
    except BudgetExceededError as e:
        logger.error(f"超出枚举预算: {e}")
        return ExitCode.BUDGET


if __name__ == "__main__":
    sys.exit(main())
