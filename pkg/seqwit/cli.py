# cli.py
import argparse
import json
import sys
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from seqwit.config import DEFAULT_RESTARTS, default_seed
from seqwit.inequalities import MeasurementPlan, mermin_chain, uffink_chain
from seqwit.optimizer import constrained_problem, maximize
from seqwit.quantum_model import StateKind, named_state
from seqwit.report import (
    RunResult,
    chain_result,
    emit_report,
    optimization_result,
    oracle_result,
    positivity_result,
    threshold_result,
)
from seqwit.sequential import oracle_check
from seqwit.thresholds import threshold_chain, threshold_sweep
from seqwit.utils import load_json_object, log, set_quiet
from seqwit.witnesses import WitnessKind, positivity_fuzz, witness_chain

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DIAGNOSTIC = 3

COMMANDS = ("mermin-chain", "uffink-chain", "witness-chain", "thresholds", "optimize", "oracle-check", "positivity-fuzz")
NEEDS_LAMBDAS = ("mermin-chain", "uffink-chain", "witness-chain")
FUZZ_GRID = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0)

# config-file keys are the long flag names
CONFIG_KEYS = {
    "command", "state", "witness", "lambdas", "angles", "format", "seed", "restarts",
    "epsilon", "objective", "level", "stage", "samples", "instances", "quiet",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    command: Literal[COMMANDS]
    state: Optional[StateKind] = None
    witness: Optional[WitnessKind] = None
    lambdas: Optional[List[float]] = None
    angles: Optional[List[float]] = None
    output_format: Literal["json", "csv"] = "csv"
    seed: int = Field(default_factory=default_seed)
    restarts: int = Field(default=DEFAULT_RESTARTS, ge=1)
    epsilon: List[float] = Field(default_factory=lambda: [0.0], min_length=1)
    objective: Literal["mermin", "uffink"] = "mermin"
    level: Literal["bound", "five_percent"] = "bound"
    stage: int = Field(default=3, ge=1)
    samples: int = Field(default=10_000, ge=1)
    instances: int = Field(default=200, ge=1)
    quiet: bool = False

    @field_validator("lambdas", "angles", "epsilon", mode="before")
    @classmethod
    def _split_csv(cls, v):
        if isinstance(v, str):
            return [s for s in v.split(",") if s.strip()]
        if isinstance(v, (int, float)):
            return [v]
        return v

    @field_validator("lambdas")
    @classmethod
    def _sharpness_range(cls, v):
        for i, lam in enumerate(v or []):
            if not 0 < lam <= 1:
                raise ValueError(f"lambdas[{i}] = {lam} outside (0, 1]")
        return v

    @field_validator("epsilon")
    @classmethod
    def _non_negative(cls, v):
        for i, eps in enumerate(v):
            if eps < 0:
                raise ValueError(f"epsilon[{i}] = {eps} must be non-negative")
        return v

    @model_validator(mode="after")
    def _command_fields(self) -> "RunConfig":
        if self.command in NEEDS_LAMBDAS and not self.lambdas:
            raise ValueError(f"lambdas: required for {self.command}")
        if self.angles is not None:
            if self.command not in ("mermin-chain", "uffink-chain"):
                raise ValueError("angles: only used by mermin-chain and uffink-chain")
            expected = 8 + 4 * len(self.lambdas)
            if len(self.angles) != expected:
                raise ValueError(f"angles: expected {expected} values for {len(self.lambdas)} Charlies, got {len(self.angles)}")
        return self

    @property
    def witness_kind(self) -> WitnessKind:
        if self.witness is not None:
            return self.witness
        return WitnessKind(self.state.value) if self.state is not None else WitnessKind.GHZ

    def inputs(self) -> Dict[str, Any]:
        return self.model_dump(mode="json", exclude={"command", "output_format", "seed", "quiet"})


def _float_list(text: str) -> List[float]:
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="python -m seqwit.cli",
        description="Sequential unsharp measurement chains: Mermin/Uffink violations and GME witness thresholds",
        argument_default=argparse.SUPPRESS,
    )
    parser.add_argument("command", nargs="?", choices=COMMANDS, default=None, help="Protocol to run")
    parser.add_argument("--config", type=str, help="Flat JSON file of flag values (flags override it)")
    parser.add_argument("--state", type=str, choices=[k.value for k in StateKind], help="Initial three-qubit state")
    parser.add_argument("--witness", type=str, choices=[k.value for k in WitnessKind], help="Witness kind")
    parser.add_argument("--lambdas", type=_float_list, help="Charlie sharpness values, e.g. 0.74,1.0")
    parser.add_argument("--angles", type=_float_list, help="Explicit plan in radians: 8 + 4n values")
    parser.add_argument("--format", type=str, choices=["json", "csv"], help="Report format (default: csv)")
    parser.add_argument("--seed", type=int, help="Random seed (default: $SEQWIT_SEED or 2020)")
    parser.add_argument("--restarts", type=int, help=f"Optimizer restarts (default: {DEFAULT_RESTARTS})")
    parser.add_argument("--epsilon", type=_float_list, help="Offset above each threshold for later stages; a comma list sweeps several")
    parser.add_argument("--objective", type=str, choices=["mermin", "uffink"], help="Optimizer objective")
    parser.add_argument("--level", type=str, choices=["bound", "five_percent"], help="Constraint level for earlier Charlies")
    parser.add_argument("--stage", type=int, help="Target Charlie for the optimizer (default: 3)")
    parser.add_argument("--samples", type=int, help="Biseparable samples per bipartition")
    parser.add_argument("--instances", type=int, help="Randomized oracle instances")
    parser.add_argument("--quiet", action="store_true", help="No status lines or progress bars")
    return parser


def parse_config(argv: List[str], config_text: Optional[str] = None) -> RunConfig:
    """Flags over config-file values over defaults."""
    ns = vars(build_parser().parse_args(argv))
    if ns.get("command") is None:
        ns.pop("command", None)
    values: Dict[str, Any] = {}

    file_values: Dict[str, Any] = {}
    if "config" in ns:
        try:
            file_values = load_json_object(ns.pop("config"))
        except (OSError, ValueError) as e:
            raise UsageError(f"config: {e}")
    elif config_text is not None:
        try:
            file_values = json.loads(config_text)
        except ValueError as e:
            raise UsageError(f"config: {e}")
        if not isinstance(file_values, dict):
            raise UsageError("config: expected a flat JSON object")
    for key in file_values:
        if key not in CONFIG_KEYS:
            raise UsageError(f"Unknown config key '{key}'")

    values.update(file_values)
    values.update(ns)
    if "format" in values:
        values["output_format"] = values.pop("format")
    if values.get("command") is None:
        raise UsageError("command: required (one of " + ", ".join(COMMANDS) + ")")

    try:
        return RunConfig(**values)
    except ValidationError as e:
        err = e.errors()[0]
        loc = ".".join(str(p) for p in err["loc"])
        msg = err["msg"].removeprefix("Value error, ")
        raise UsageError(f"{loc}: {msg}" if loc else msg)


def run_command(cfg: RunConfig) -> RunResult:
    """One module operation per command."""
    inputs = cfg.inputs()
    log(f"⚙️ Running {cfg.command}")

    if cfg.command in ("mermin-chain", "uffink-chain"):
        if cfg.angles is not None:
            try:
                plan = MeasurementPlan.from_angles(cfg.angles, cfg.lambdas)
            except ValueError as e:
                raise UsageError(f"angles: {e}")
        else:
            plan = MeasurementPlan.symmetric(cfg.lambdas)
        initial = named_state(cfg.state or StateKind.GHZ)
        chain = mermin_chain if cfg.command == "mermin-chain" else uffink_chain
        return chain_result(cfg.command, chain(plan, initial), inputs, cfg.seed)

    if cfg.command == "witness-chain":
        initial = named_state(cfg.state) if cfg.state is not None else None
        return chain_result(cfg.command, witness_chain(cfg.witness_kind, cfg.lambdas, initial), inputs, cfg.seed)

    if cfg.command == "thresholds":
        initial = named_state(cfg.state) if cfg.state is not None else None
        if len(cfg.epsilon) == 1:
            tables = [threshold_chain(cfg.witness_kind, epsilon=cfg.epsilon[0], initial=initial)]
        else:
            tables = threshold_sweep(cfg.witness_kind, cfg.epsilon, initial)
        return threshold_result(tables, inputs, cfg.seed)

    if cfg.command == "optimize":
        problem = constrained_problem(cfg.objective, cfg.level, cfg.stage)
        return optimization_result(maximize(problem, cfg.restarts, cfg.seed), inputs, cfg.seed)

    if cfg.command == "oracle-check":
        return oracle_result(oracle_check(cfg.instances, cfg.seed), inputs, cfg.seed)

    lambdas = cfg.lambdas or list(FUZZ_GRID)
    report = positivity_fuzz(cfg.witness_kind, cfg.samples, lambdas, cfg.seed)
    return positivity_result(report, inputs, cfg.seed)


def main(argv: Optional[List[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    parser = build_parser()
    if not argv:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE

    try:
        cfg = parse_config(argv)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_USAGE

    set_quiet(cfg.quiet)
    try:
        result = run_command(cfg)
    except UsageError as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as e:
        # numerical failure inside a run, e.g. a chain state losing positivity
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_DIAGNOSTIC

    sys.stdout.write(emit_report(result, cfg.output_format))
    if result.diagnostic:
        log(f"⚠️ {result.diagnostic}")
        return EXIT_DIAGNOSTIC
    log(f"✅ {cfg.command} done")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
