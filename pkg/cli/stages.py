"""
This module contains the pipeline runner, which runs each stage against a run store: seed
ingestion, fault injection, model evaluation, under-specification filtering, mutation and
reporting. Every stage reads what earlier stages stored and only adds missing records.
"""

import logging
import os
from contextlib import contextmanager
from typing import Any, Dict, Iterator, List, Optional, Sequence, Set, Tuple

from cli.config import RunConfig
from cli.errors import DependencyMissingError, StageError
from corpus.errors import CorpusError
from corpus.loader import corpus_hash, ensure_unique_ids, filter_seeds, load_corpus
from corpus.models import SeedProgram
from execution.errors import ExecutionError
from execution.sandbox import Sandbox
from faults.errors import FaultInjectionError
from faults.injector import generate_fault_tasks
from faults.kill import KillChecker
from faults.models import FaultyProgram, InjectedFault
from filtering.errors import FilterError, MissingAnswersError
from filtering.verdicts import FilterVerdict, filter_underspecified, gate_for_model
from gateway.dispatcher import ModelGateway
from gateway.errors import GatewayError
from gateway.models import FaultLocTask, ModelAnswer, Phase
from metrics.errors import MetricsError
from metrics.models import ScoreRecord
from metrics.report import emit_report
from metrics.scoring import score_answers
from runstore.models import StreamName
from runstore.store import RunStore
from source_model.errors import SourceModelError
from source_model.models import Quartile, SubjectLanguage
from source_model.utils import content_hash, line_count
from spm.content import ContentProvider, ModelContentProvider, TemplateContentProvider
from spm.engine import Plan, build_mutants, parse_plans
from spm.errors import SpmError
from spm.models import MutantProgram, plan_label
from spm.preservation import PreservationChecker

logger = logging.getLogger(__name__)

STAGES = ("ingest", "inject", "evaluate", "filter", "mutate", "report", "pipeline")
STAGE_EXIT_CODES: Dict[str, int] = {stage: 10 + n for n, stage in enumerate(STAGES)}
DOMAIN_ERRORS = (
    CorpusError,
    SourceModelError,
    FaultInjectionError,
    ExecutionError,
    SpmError,
    GatewayError,
    FilterError,
    MetricsError,
)
REPORT_DIR = "report"

# (fault_id, plan, strength, quartile) of a stored mutant
MutantKey = Tuple[str, str, int, str]


@contextmanager
def stage(name: str) -> Iterator[None]:
    """
    Re-raises failures of the domain packages as a StageError of stage `name`.
    """
    logger.info(f"Stage {name} started")
    try:
        yield
    except StageError as e:
        if e.stage == "pipeline":
            e.stage = name
        raise
    except DOMAIN_ERRORS as e:
        raise StageError(e.message, name)
    logger.info(f"Stage {name} finished")


def baseline_task(faulty: FaultyProgram) -> FaultLocTask:
    fault = faulty.fault
    return FaultLocTask(
        task_id=content_hash("task", Phase.baseline.value, fault.fault_id),
        phase=Phase.baseline,
        source_text=fault.faulty_source,
        spec_text=faulty.seed.spec_text,
        subject_language=fault.subject_language,
        ground_truth_line=fault.fault_line,
        line_count=line_count(fault.faulty_source),
        seed_id=fault.seed_id,
        fault_id=fault.fault_id,
        fault_kind=fault.kind,
        fault_quartile=fault.quartile,
    )


def spm_task(mutant: MutantProgram, faulty: FaultyProgram) -> FaultLocTask:
    return FaultLocTask(
        task_id=content_hash("task", Phase.spm.value, mutant.mutant_id),
        phase=Phase.spm,
        source_text=mutant.source_text,
        spec_text=faulty.seed.spec_text,
        subject_language=mutant.subject_language,
        ground_truth_line=mutant.tracked_fault_line,
        line_count=mutant.line_count,
        seed_id=mutant.seed_id,
        fault_id=mutant.fault_id,
        mutant_id=mutant.mutant_id,
        fault_kind=faulty.fault.kind,
        fault_quartile=faulty.fault.quartile,
        plan=mutant.plan,
        steps=mutant.steps,
    )


def mutant_key(mutant: MutantProgram) -> MutantKey:
    first = mutant.steps[0]
    return mutant.fault_id, mutant.plan, first.strength, first.quartile.value


class PipelineRunner:
    """
    Runs pipeline stages for one run store. Stage order is ingest, inject, evaluate
    (baseline), filter, mutate, evaluate (spm) and report; a stage whose input is missing
    raises DependencyMissingError naming the absent output.
    """

    def __init__(
        self,
        config: RunConfig,
        store: RunStore,
        gateway: Optional[ModelGateway] = None,
        sandbox: Optional[Sandbox] = None,
    ) -> None:
        self.config = config
        self.store = store
        self.gateway = gateway or ModelGateway(
            config.models,
            parallel=config.parallel,
            chars_per_token=config.filter.chars_per_token,
        )
        self.sandbox = sandbox or Sandbox(
            timeout_s=config.execution.timeout_s, parallel=config.execution.parallel
        )

    def _require(self, stream: StreamName, stage_name: str) -> List[Any]:
        records = self.store.read(stream)
        if not records:
            raise DependencyMissingError(stream.value, stage_name)
        return records

    def _tasks(self, phase: Phase) -> List[FaultLocTask]:
        return [t for t in self.store.read(StreamName.tasks) if t.phase == phase]

    def _faulty_programs(self) -> List[FaultyProgram]:
        seeds: Dict[str, SeedProgram] = {s.seed_id: s for s in self.store.read(StreamName.seeds)}
        faults: List[InjectedFault] = self.store.read(StreamName.faults)
        return [FaultyProgram(fault=f, seed=seeds[f.seed_id]) for f in faults]

    def ingest(self) -> List[SeedProgram]:
        """
        Loads and size-filters the configured seed files into the seeds stream.
        """
        with stage("ingest"):
            corpus = self.config.corpus
            paths = ((SubjectLanguage.PY, corpus.python), (SubjectLanguage.JAVA, corpus.java))
            sources = [(language, path) for language, path in paths if path]
            if not sources:
                raise StageError("No corpus file is configured.", "ingest")
            limits = self.config.filter
            loaded = [
                load_corpus(self.config.resolve_path(path), language, limits.chars_per_token)
                for language, path in sources
            ]
            ensure_unique_ids([seed for seeds in loaded for seed in seeds])
            retained: List[SeedProgram] = []
            for seeds in loaded:
                kept, rejected = filter_seeds(seeds, limits.min_loc, limits.max_tokens)
                for rejection in rejected:
                    logger.info(
                        f"Rejected seed '{rejection.seed.seed_id}': {rejection.reason.value}"
                    )
                retained.extend(kept)
            added = self.store.append_many(StreamName.seeds, retained)
            self.store.set_corpus_hash(corpus_hash(self.store.read(StreamName.seeds)))
            logger.info(f"Stored {len(added)} new seeds ({len(retained)} retained)")
        return retained

    def inject(self) -> List[FaultyProgram]:
        """
        Injects faults into every stored seed, checks which ones change behaviour and stores
        faults plus their baseline tasks.
        """
        with stage("inject"):
            seeds = self._require(StreamName.seeds, "inject")
            settings = self.config.faults
            generated = generate_fault_tasks(
                seeds,
                settings.kinds,
                settings.quartiles,
                settings.per_combination,
                self.config.rng_seed,
            )
            stored = self.store.keys(StreamName.faults)
            fresh = [f for f in generated if f.fault.fault_id not in stored]
            if settings.check_kills and fresh:
                fresh = KillChecker(self.sandbox).check(fresh)
            self.store.append_many(StreamName.faults, [f.fault for f in fresh])
            programs = self._faulty_programs()
            self.store.append_many(StreamName.tasks, [baseline_task(p) for p in programs])
            logger.info(f"Stored {len(fresh)} new faults ({len(programs)} in total)")
        return programs

    def _score(self) -> List[ScoreRecord]:
        tasks: List[FaultLocTask] = self.store.read(StreamName.tasks)
        scored = self.store.keys(StreamName.scores)
        answers: List[ModelAnswer] = [
            a
            for a in self.store.read(StreamName.answers)
            if f"{a.task_id}|{a.model_name}" not in scored
        ]
        killed = {f.fault_id: f.killed for f in self.store.read(StreamName.faults)}
        scores = score_answers(
            tasks, answers, self.config.scoring.tolerance, self.config.categories, killed
        )
        self.store.append_many(StreamName.scores, scores)
        return scores

    def _eligible(self, model_name: str, spm_tasks: Sequence[FaultLocTask]) -> List[FaultLocTask]:
        verdicts: List[FilterVerdict] = self._require(StreamName.verdicts, "evaluate")
        retained_ids = {v.task_id for v in verdicts if v.retained}
        retained = [t for t in self._tasks(Phase.baseline) if t.task_id in retained_ids]
        answers = self.store.read(StreamName.answers)
        try:
            eligible = gate_for_model(retained, model_name, answers)
        except MissingAnswersError as e:
            logger.error(e.message)
            raise DependencyMissingError(StreamName.answers.value, "evaluate")
        faults = {t.fault_id for t in eligible}
        return [t for t in spm_tasks if t.fault_id in faults]

    def evaluate(self, phase: Phase, models: Optional[Sequence[str]] = None) -> int:
        """
        Queries every model for its outstanding tasks of `phase` and scores the new answers.
        Mutation-phase tasks are only sent to a model for faults it localized at baseline.
        Returns the number of answers stored.
        """
        with stage("evaluate"):
            names = list(models or self.config.evaluated_models)
            for name in names:
                self.gateway.resolve(name)
            tasks = self._tasks(phase)
            if not tasks:
                missing = StreamName.tasks if phase == Phase.baseline else StreamName.mutants
                raise DependencyMissingError(missing.value, "evaluate")
            stored = 0
            for name in names:
                targets = tasks if phase == Phase.baseline else self._eligible(name, tasks)
                answered = self.store.keys(StreamName.answers)
                outstanding = [t for t in targets if f"{t.task_id}|{name}" not in answered]
                logger.info(
                    f"{name}: {len(outstanding)} of {len(targets)} {phase.value} tasks to answer"
                )
                if not outstanding:
                    continue

                def persist(batch: List[ModelAnswer]) -> None:
                    self.store.append_many(StreamName.answers, batch)

                stored += len(self.gateway.evaluate(name, outstanding, on_batch=persist))
            self._score()
        return stored

    def filter(self, panel: Optional[Sequence[str]] = None) -> List[FilterVerdict]:
        """
        Stores a verdict per baseline task: retained when some panel model localized it.
        """
        with stage("filter"):
            tasks = self._tasks(Phase.baseline)
            if not tasks:
                raise DependencyMissingError(StreamName.tasks.value, "filter")
            members = list(panel or self.config.panel_models)
            answers = self.store.read(StreamName.answers)
            try:
                _, _, verdicts = filter_underspecified(tasks, members, answers)
            except MissingAnswersError as e:
                logger.error(e.message)
                raise DependencyMissingError(StreamName.answers.value, "filter")
            self.store.append_many(StreamName.verdicts, verdicts)
        return verdicts

    def _content_provider(self, content: str) -> ContentProvider:
        if content == "template":
            return TemplateContentProvider()
        if not content.startswith("model:"):
            raise StageError(f"Unknown content mode '{content}'.", "mutate")
        model_name = content.split(":", 1)[1]
        self.gateway.resolve(model_name)
        return ModelContentProvider(
            lambda prompt: self.gateway.ask(model_name, prompt), model_name
        )

    def _verified(
        self,
        checker: Optional[PreservationChecker],
        faulty: FaultyProgram,
        mutants: List[MutantProgram],
    ) -> List[MutantProgram]:
        if checker is None or not mutants or not checker.checkable(faulty):
            return mutants
        results = checker.check(faulty, mutants)
        return [
            m.model_copy(update={"preserved": r.equivalent}) for m, r in zip(mutants, results)
        ]

    def mutate(
        self,
        plans: Optional[str] = None,
        strengths: Optional[Sequence[int]] = None,
        quartiles: Optional[Sequence[Quartile]] = None,
        content: Optional[str] = None,
        verify: Optional[bool] = None,
    ) -> int:
        """
        Builds mutants of every retained fault for each strength and quartile, optionally
        verifies them by execution and stores them with their mutation-phase tasks. Mutants
        that changed behaviour get no task. Returns the number of mutants stored.
        """
        with stage("mutate"):
            settings = self.config.spm
            plans_text = plans or settings.plans
            strengths = list(strengths or settings.strengths)
            quartiles = list(quartiles or settings.quartiles)
            verdicts: List[FilterVerdict] = self._require(StreamName.verdicts, "mutate")
            retained = {v.fault_id for v in verdicts if v.retained}
            programs = [p for p in self._faulty_programs() if p.fault.fault_id in retained]
            provider = self._content_provider(content or settings.content)
            verify = settings.verify if verify is None else verify
            checker = PreservationChecker(self.sandbox) if verify else None
            plans_by_language = {
                language: parse_plans(plans_text, language) for language in SubjectLanguage
            }
            done: Set[MutantKey] = {mutant_key(m) for m in self.store.read(StreamName.mutants)}
            stored = 0
            for faulty in programs:
                mutants: List[MutantProgram] = []
                for strength in strengths:
                    for quartile in quartiles:
                        todo: List[Plan] = [
                            plan
                            for plan in plans_by_language[faulty.subject_language]
                            if (faulty.fault.fault_id, plan_label(plan), strength, quartile.value)
                            not in done
                        ]
                        mutants.extend(
                            build_mutants(
                                faulty, todo, strength, quartile, provider, self.config.rng_seed
                            )
                        )
                mutants = self._verified(checker, faulty, mutants)
                stored += len(self.store.append_many(StreamName.mutants, mutants))
            self._store_spm_tasks(programs)
            logger.info(f"Stored {stored} new mutants for {len(programs)} retained faults")
        return stored

    def _store_spm_tasks(self, programs: Sequence[FaultyProgram]) -> None:
        by_fault = {p.fault.fault_id: p for p in programs}
        tasks = []
        for mutant in self.store.read(StreamName.mutants):
            if mutant.fault_id not in by_fault:
                continue
            if mutant.preserved is False:
                logger.error(f"Mutant {mutant.mutant_id} changed behaviour; no task created")
                continue
            tasks.append(spm_task(mutant, by_fault[mutant.fault_id]))
        self.store.append_many(StreamName.tasks, tasks)

    def report(self, report_dir: Optional[str] = None) -> Dict[str, Any]:
        """
        Writes the report tables and summary for everything scored so far.
        """
        with stage("report"):
            scores: List[ScoreRecord] = self._require(StreamName.scores, "report")
            verdicts: List[FilterVerdict] = self.store.read(StreamName.verdicts)
            retained = [v.task_id for v in verdicts if v.retained] if verdicts else None
            scoring = self.config.scoring
            summary = emit_report(
                report_dir or os.path.join(self.store.run_dir, REPORT_DIR),
                [s for s in scores if s.phase == Phase.baseline],
                [s for s in scores if s.phase == Phase.spm],
                answers=self.store.read(StreamName.answers),
                retained=retained,
                longitudinal_pairs=scoring.longitudinal_pairs,
                exclude_unkilled=scoring.exclude_unkilled,
                tolerance=scoring.tolerance,
            )
        return summary

    def run_all(self, models: Optional[Sequence[str]] = None) -> Dict[str, Any]:
        """
        Runs every stage in order. Without a configured panel, the evaluated models form it.
        """
        with stage("pipeline"):
            self.ingest()
            self.inject()
            self.evaluate(Phase.baseline, models)
            self.filter(None if self.config.panel else models)
            self.mutate()
            self.evaluate(Phase.spm, models)
            return self.report()
