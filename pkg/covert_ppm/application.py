"""Experiment runners behind the command line verbs.

ExperimentRunner owns one validated config and produces result rows for the
figure2, plan, constants and montecarlo verbs. Per-n work fans out over a thread
pool; rows are sorted before they reach the writer, so output does not depend on
the worker count.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .adversary import converse_secondorder, detector_constants
from .asymptotics import (
    ChannelConstants,
    CodePlan,
    channel_constants,
    first_order_slopes,
    plan_beta,
    plan_D,
    plan_V,
    second_order_beta_envelopes,
    second_order_D,
    second_order_V_envelopes,
)
from .codebook_io import write_codebook
from .coding import (
    achievability_conditions_log,
    error_expectation_bounds,
    generate_codebook,
    monte_carlo_error,
    optimize_threshold,
)
from .config import METRICS, ExperimentConfig
from .csv_writer import ExperimentCSVWriter
from .debug_tools import diagnose_certificate, diagnose_plan, summarize_diagnosis
from .dmc_core import CovertChannelPair
from .errors import CombinatorialBlowup, ComplexRootRegime, CovertError
from .file_path_generator import resolve_output_path
from .ppm import make_ppm, ppm_beta_bound, ppm_divergence_bound, ppm_exact_metrics, ppm_tv_bound
from .statistics_aggregator import ProgressReporter, aggregate_key_statistics, convert_information

logger = logging.getLogger(__name__)

LogCallback = Callable[[str, str], None]

FIGURE2_COLUMNS = (
    "n",
    "metric",
    "ell_n",
    "logM_over_sqrt_n",
    "envelope_upper",
    "envelope_lower",
    "first_order",
    "unit",
    "provenance",
    "note",
)
PLAN_COLUMNS = (
    "n",
    "metric",
    "ell_n",
    "log_m_n",
    "log_k_n",
    "converse",
    "unit",
    "provenance",
    "corrections",
    "diagnosis",
)
CONSTANTS_COLUMNS = ("name", "value", "unit", "formula", "provenance")
CONDITIONS = ("positive_prob", "F_Y", "F_Z", "dist_P_Z", "quasi_metric")
MONTECARLO_COLUMNS = (
    "n",
    "ell",
    "M",
    "K",
    "gamma",
    "trials",
    "criterion",
    "error_rate",
    "ci_low",
    "ci_high",
    "sigma",
    "worst_key",
    "error_bound",
    "within_bound",
    "metric",
    "covertness",
    "covertness_provenance",
    "certificate_passed",
) + tuple(f"slack_{name}" for name in CONDITIONS) + ("diagnosis", "provenance")

MONTECARLO_SIGMAS = 3.0


class ExperimentRunner:
    """Runs one verb's experiment for a config."""

    def __init__(self, config: ExperimentConfig, log_callback: Optional[LogCallback] = None):
        """Initialize the runner.

        Args:
            config: Validated experiment config
            log_callback: Optional progress sink called as log_callback(message, level)
        """
        self.config = config
        self.log_callback = log_callback
        self._channel: Optional[CovertChannelPair] = None
        self._constants: Optional[ChannelConstants] = None

    @property
    def channel(self) -> CovertChannelPair:
        if self._channel is None:
            self._channel = self.config.channel()
        return self._channel

    @property
    def constants(self) -> ChannelConstants:
        if self._constants is None:
            self._constants = channel_constants(self.channel)
        return self._constants

    def _log(self, message: str, level: str = "INFO") -> None:
        if self.log_callback is not None:
            self.log_callback(message, level)
        else:
            logger.log(getattr(logging, level, logging.INFO), message)

    def _info(self, value: Optional[float]) -> Optional[float]:
        if value is None:
            return None
        return convert_information(value, self.config.unit)

    def _fan_out(self, task: Callable[[int], List[Dict[str, Any]]]) -> List[Dict[str, Any]]:
        grid = self.config.n_grid
        progress = ProgressReporter(
            len(grid),
            lambda done, total: self._log(f"{done}/{total} blocklengths done"),
            every=max(1, len(grid) // 4),
        )

        def run(n: int) -> List[Dict[str, Any]]:
            rows = task(n)
            progress.advance()
            return rows

        if self.config.workers > 1 and len(grid) > 1:
            with ThreadPoolExecutor(max_workers=self.config.workers) as executor:
                batches = list(executor.map(run, grid))
        else:
            batches = [run(n) for n in grid]
        rows = [row for batch in batches for row in batch]
        rows.sort(key=lambda r: (r["n"], METRICS.index(r["metric"])))
        return rows

    # -- planners --------------------------------------------------------------------

    def plan(self, metric: str, n: int) -> CodePlan:
        """Run the planner of one metric at blocklength n."""
        c = self.config
        if metric == "kl":
            return plan_D(n, c.epsilon, c.delta, c.rho, self.constants, c.berry_esseen)
        if metric == "tv":
            return plan_V(n, c.epsilon, c.delta, c.rho, self.constants, c.berry_esseen)
        return plan_beta(n, c.epsilon, c.delta, c.alpha, c.rho, self.constants, c.berry_esseen)

    # -- figure2 ---------------------------------------------------------------------

    def _figure2_rows(self, n: int) -> List[Dict[str, Any]]:
        c = self.config
        slopes = first_order_slopes(c.delta, c.alpha, self.constants, c.rho)
        first = {"kl": slopes.slope_d, "tv": slopes.slope_v, "beta": slopes.slope_beta}
        root_n = math.sqrt(n)
        rows = []
        for metric in METRICS:
            row: Dict[str, Any] = {
                "n": n,
                "metric": metric,
                "first_order": self._info(first[metric]),
                "unit": c.unit,
                "provenance": "envelope",
                "note": "",
            }
            try:
                if metric == "kl":
                    estimate = second_order_D(n, c.epsilon, c.delta, self.constants)
                    upper, lower = estimate.band_high, estimate.band_low
                elif metric == "tv":
                    env = second_order_V_envelopes(n, c.epsilon, c.delta, self.constants)
                    upper, lower = env.upper, env.lower
                else:
                    env = second_order_beta_envelopes(
                        n, c.epsilon, c.delta, c.alpha, self.constants
                    )
                    upper, lower = env.upper, env.lower
                row["envelope_upper"] = self._info(upper / root_n)
                row["envelope_lower"] = self._info(lower / root_n)
                plan = self.plan(metric, n)
                row["ell_n"] = plan.ell_n
                row["logM_over_sqrt_n"] = self._info(plan.log_m_n / root_n)
                row["provenance"] = plan.provenance
            except ComplexRootRegime as e:
                row["note"] = f"complex-root regime: {e}"
            except CovertError as e:
                row["note"] = str(e)
                self._log(f"figure2 n={n} {metric}: {e}", "WARNING")
            rows.append(row)
        return rows

    def run_figure2(self) -> List[Dict[str, Any]]:
        """Planner points, second-order envelopes and first-order constants per n."""
        self._log(f"figure2 over {len(self.config.n_grid)} blocklengths")
        return self._fan_out(self._figure2_rows)

    # -- plan ------------------------------------------------------------------------

    def _plan_rows(self, n: int) -> List[Dict[str, Any]]:
        c = self.config
        rows = []
        for metric in METRICS:
            row: Dict[str, Any] = {"n": n, "metric": metric, "unit": c.unit}
            try:
                alpha = c.alpha if metric == "beta" else None
                row["converse"] = self._info(
                    converse_secondorder(metric, n, c.epsilon, c.delta, alpha, self.constants).value
                )
            except CovertError as e:
                logger.debug("no converse at n=%d %s: %s", n, metric, e)
            try:
                plan = self.plan(metric, n)
            except CovertError as e:
                row["diagnosis"] = str(e)
                rows.append(row)
                continue
            row.update(
                ell_n=plan.ell_n,
                log_m_n=self._info(plan.log_m_n),
                log_k_n=self._info(plan.log_k_n),
                provenance=plan.provenance,
                corrections="; ".join(plan.corrections),
                diagnosis=summarize_diagnosis(diagnose_plan(plan, self.constants)),
            )
            rows.append(row)
        return rows

    def run_plan(self) -> List[Dict[str, Any]]:
        """Planned (ell_n, log M_n, log K_n) per n and metric, with the converse value."""
        return self._fan_out(self._plan_rows)

    # -- constants -------------------------------------------------------------------

    def run_constants(self) -> List[Dict[str, Any]]:
        """Channel constants, detector constants and first-order slopes."""
        c = self.config
        rows: List[Dict[str, Any]] = []
        information = {"D_P", "D_Q"}
        for name, value in self.constants.as_dict().items():
            in_nats = name in information
            rows.append(
                {
                    "name": name,
                    "value": self._info(value) if in_nats else value,
                    "unit": c.unit if in_nats else "",
                    "provenance": "exact",
                }
            )
        try:
            detector = detector_constants(self.constants)
            for name, value in detector.as_dict().items():
                rows.append(
                    {
                        "name": name,
                        "value": value,
                        "formula": detector.formulas[name],
                        "provenance": "bound",
                    }
                )
        except CovertError as e:
            self._log(f"detector constants unavailable: {e}", "WARNING")
        slopes = first_order_slopes(c.delta, c.alpha, self.constants, c.rho)
        for name, value in slopes.as_dict().items():
            is_rate = name.startswith(("slope", "key_slope"))
            rows.append(
                {
                    "name": name,
                    "value": self._info(value) if is_rate else value,
                    "unit": c.unit if is_rate else "",
                    "provenance": "first-order",
                }
            )
        return rows

    # -- montecarlo ------------------------------------------------------------------

    def _covertness(self, params) -> Tuple[Optional[float], str]:
        c = self.config
        try:
            exact = ppm_exact_metrics(self.channel, params, c.alpha if c.metric == "beta" else None)
            if c.metric == "kl":
                return exact.kl, "exact"
            if c.metric == "tv":
                return exact.tv, "exact"
            return 1.0 - c.alpha - float(exact.beta), "exact"
        except CombinatorialBlowup:
            pass
        if c.metric == "kl":
            return ppm_divergence_bound(self.channel, params.n, params.ell).value, "bound"
        if c.metric == "tv":
            return ppm_tv_bound(self.channel, params.n, params.ell).value, "bound"
        beta = ppm_beta_bound(self.channel, params.n, params.ell, c.alpha).value
        return 1.0 - c.alpha - beta, "bound"

    def run_montecarlo(self) -> List[Dict[str, Any]]:
        """Simulate a random PPM code and compare its error with the decoder bound."""
        c = self.config
        params = make_ppm(c.n, c.ell)
        codebook_seed, trial_seed = np.random.SeedSequence(c.seed).spawn(2)
        codebook = generate_codebook(params, c.M, c.K, np.random.default_rng(codebook_seed))
        if c.codebook_out:
            write_codebook(codebook, c.codebook_out)
        if c.gamma is None:
            gamma = optimize_threshold(self.channel, params, c.M).gamma
        else:
            gamma = c.gamma
        self._log(f"montecarlo n={c.n} ell={c.ell} M={c.M} K={c.K} gamma={gamma:.6g}")
        result = monte_carlo_error(
            codebook,
            self.channel,
            gamma,
            c.trials,
            rng_seed=int(trial_seed.generate_state(1, dtype=np.uint64)[0]),
            max_over_keys=c.max_over_keys,
            workers=c.workers,
        )
        summary = aggregate_key_statistics(
            {key: {"errors": e, "trials": result.trials} for key, e in enumerate(result.errors)}
        )
        bound = error_expectation_bounds(self.channel, params, c.M, gamma).total
        try:
            covertness, covertness_provenance = self._covertness(params)
        except CovertError as e:
            self._log(f"covertness unavailable: {e}", "WARNING")
            covertness, covertness_provenance = None, ""
        row: Dict[str, Any] = {
            "n": c.n,
            "ell": c.ell,
            "M": c.M,
            "K": c.K,
            "gamma": gamma,
            "trials": c.trials,
            "criterion": "max" if c.max_over_keys else "average",
            "error_rate": result.error_rate,
            "ci_low": result.ci_low,
            "ci_high": result.ci_high,
            "sigma": result.sigma,
            "worst_key": summary["worst_key"],
            "error_bound": bound,
            "within_bound": result.error_rate <= bound + MONTECARLO_SIGMAS * result.sigma,
            "metric": c.metric,
            "covertness": covertness,
            "covertness_provenance": covertness_provenance,
            "provenance": "monte-carlo",
        }
        try:
            report = achievability_conditions_log(
                c.n,
                math.log(c.M),
                math.log(c.K),
                c.metric,
                self.channel,
                params,
                c.delta,
                c.epsilon,
                c.alpha if c.metric == "beta" else None,
            )
        except CovertError as e:
            row["diagnosis"] = f"no certificate: {e}"
        else:
            row["certificate_passed"] = report.passed
            row["diagnosis"] = summarize_diagnosis(diagnose_certificate(report))
            for condition in report.conditions:
                row[f"slack_{condition.name}"] = condition.slack
        if not row["within_bound"]:
            self._log(
                f"empirical error {result.error_rate:.6g} exceeds bound {bound:.6g}", "WARNING"
            )
        return [row]


VERB_COLUMNS: Dict[str, Sequence[str]] = {
    "figure2": FIGURE2_COLUMNS,
    "plan": PLAN_COLUMNS,
    "constants": CONSTANTS_COLUMNS,
    "montecarlo": MONTECARLO_COLUMNS,
}


def write_rows(verb: str, rows: List[Dict[str, Any]], config: ExperimentConfig) -> str:
    """Write rows under the verb's header to config.out (stdout when empty)."""
    path = resolve_output_path(config.out, verb, config.seed)
    with ExperimentCSVWriter(path or None, VERB_COLUMNS[verb]) as writer:
        writer.write_rows(rows)
        stats = writer.get_statistics()
    logger.info("%s: %d rows to %s", verb, stats["rows_written"], stats["file_path"])
    return path


def _run(verb: str, config: ExperimentConfig, log_callback: Optional[LogCallback]):
    runner = ExperimentRunner(config, log_callback)
    rows = getattr(runner, f"run_{verb}")()
    write_rows(verb, rows, config)
    return rows


def run_figure2(
    config: ExperimentConfig, log_callback: Optional[LogCallback] = None
) -> List[Dict[str, Any]]:
    return _run("figure2", config, log_callback)


def run_plan(
    config: ExperimentConfig, log_callback: Optional[LogCallback] = None
) -> List[Dict[str, Any]]:
    return _run("plan", config, log_callback)


def run_constants(
    config: ExperimentConfig, log_callback: Optional[LogCallback] = None
) -> List[Dict[str, Any]]:
    return _run("constants", config, log_callback)


def run_montecarlo(
    config: ExperimentConfig, log_callback: Optional[LogCallback] = None
) -> List[Dict[str, Any]]:
    return _run("montecarlo", config, log_callback)


__all__ = [
    "ExperimentRunner",
    "run_constants",
    "run_figure2",
    "run_montecarlo",
    "run_plan",
    "write_rows",
]
