"""
This module applies mutation plans to faulty programs and builds the standard mutant set.
"""

import logging
from typing import Dict, List, Optional, Sequence, Tuple, Union

from faults.models import FaultyProgram
from source_model.models import Quartile, SubjectLanguage
from source_model.utils import content_hash, stable_rng
from spm.content import ContentProvider
from spm.errors import InsufficientTargetsError, InvalidSpmKindError, SpmError
from spm.models import (
    MAX_STRENGTH,
    MIN_STRENGTH,
    SPM_LABELS,
    AppliedStep,
    MutantProgram,
    SpmKind,
    plan_label,
)
from spm.operators.base import SpmOperator
from spm.operators.comments import MisleadingCommentsOperator
from spm.operators.dead_code import DeadCodeOperator
from spm.operators.renames import MisleadingVariableNamesOperator
from spm.operators.shuffle import FunctionShuffleOperator
from spm.state import MutationState

logger = logging.getLogger(__name__)

OPERATORS: Dict[SpmKind, SpmOperator] = {
    SpmKind.dead_code: DeadCodeOperator(),
    SpmKind.misleading_comments: MisleadingCommentsOperator(),
    SpmKind.misleading_variable_names: MisleadingVariableNamesOperator(),
    SpmKind.function_shuffle: FunctionShuffleOperator(),
}

Plan = Tuple[SpmKind, ...]
# (plan label, error) for every mutant of a set that could not be built
PlanFailure = Tuple[str, SpmError]

_c = SpmKind.misleading_comments
_v = SpmKind.misleading_variable_names
_d = SpmKind.dead_code
_f = SpmKind.function_shuffle


def standard_plans(language: SubjectLanguage) -> List[Plan]:
    """
    The six-mutant composition set, innermost kind first. FunctionShuffle is dropped for
    languages it does not support, leaving five.
    """
    plans: List[Plan] = [(_c,), (_v,), (_d,), (_f,), (_v, _c), (_d, _v, _c)]
    return [plan for plan in plans if all(OPERATORS[k].supports(language) for k in plan)]


def parse_kind(text: str) -> SpmKind:
    for kind, label in SPM_LABELS.items():
        if text in (kind.value, label, f"M_{label}"):
            return kind
    raise InvalidSpmKindError(f"Unknown mutation kind '{text}'.")


def parse_plans(text: str, language: SubjectLanguage) -> List[Plan]:
    """
    Resolves `standard` or `single:<kind>` into plans for one subject language.
    """
    if text == "standard":
        return standard_plans(language)
    if text.startswith("single:"):
        kind = parse_kind(text.split(":", 1)[1])
        if not OPERATORS[kind].supports(language):
            return []
        return [(kind,)]
    raise InvalidSpmKindError(f"Unknown plan '{text}', expected 'standard' or 'single:<kind>'.")


def _starting_state(
    target: Union[FaultyProgram, MutantProgram],
) -> Tuple[MutationState, str, str, SubjectLanguage, Tuple[AppliedStep, ...]]:
    if isinstance(target, FaultyProgram):
        fault = target.fault
        state = MutationState(fault.faulty_source, fault.subject_language, fault.fault_line)
        return state, fault.fault_id, fault.seed_id, fault.subject_language, ()
    state = MutationState(
        target.source_text, target.subject_language, target.tracked_fault_line, target.ledger
    )
    return state, target.fault_id, target.seed_id, target.subject_language, target.steps


def apply_spm(
    target: Union[FaultyProgram, MutantProgram],
    kind: SpmKind,
    strength: int,
    quartile: Quartile,
    provider: ContentProvider,
    rng_seed: int,
    allow_partial: bool = True,
) -> MutantProgram:
    """
    Applies one mutation step to a faulty program or an existing mutant. Template content
    makes the result a pure function of the arguments.
    """
    state, fault_id, seed_id, language, steps = _starting_state(target)
    operator = OPERATORS[kind]
    if not operator.supports(language):
        raise InvalidSpmKindError(f"{kind.value} is not defined for {language.value} programs.")
    if not MIN_STRENGTH <= strength <= MAX_STRENGTH:
        raise SpmError(f"Strength {strength} is outside [{MIN_STRENGTH}, {MAX_STRENGTH}].")

    kinds = tuple(step.kind for step in steps) + (kind,)
    plan = plan_label(kinds)
    rng = stable_rng("spm", fault_id, plan, strength, quartile.value, rng_seed)
    effective = operator.apply(state, strength, quartile, provider, rng)
    if effective < strength:
        if not allow_partial:
            raise InsufficientTargetsError(
                f"{kind.value} found {effective} of {strength} targets in {quartile.value}.",
                effective,
            )
        logger.warning(
            f"{kind.value} on fault {fault_id}: effective strength {effective} of {strength}"
        )
    # the mutant must still parse
    state.index()

    applied = steps + (
        AppliedStep(kind=kind, strength=strength, quartile=quartile, effective_strength=effective),
    )
    source_hash = content_hash(state.source_text)
    step_keys = [
        (s.kind.value, s.strength, s.quartile.value, s.effective_strength) for s in applied
    ]
    mutant_id = content_hash(fault_id, plan, step_keys, provider.mode.value, rng_seed, source_hash)
    mutant = MutantProgram(
        mutant_id=mutant_id,
        fault_id=fault_id,
        seed_id=seed_id,
        subject_language=language,
        plan=plan,
        steps=applied,
        content_mode=provider.mode,
        rng_seed=rng_seed,
        source_text=state.source_text,
        source_hash=source_hash,
        tracked_fault_line=state.tracked_line,
        fault_line_text=state.fault_line_text,
        line_map=state.ledger.as_tuple(),
        line_count=state.line_count,
    )
    logger.debug(f"Built {plan} for fault {fault_id}: fault line now {state.tracked_line}")
    return mutant


def apply_plan(
    faulty: FaultyProgram,
    plan: Plan,
    strength: int,
    quartile: Quartile,
    provider: ContentProvider,
    rng_seed: int,
    allow_partial: bool = True,
) -> MutantProgram:
    """
    Applies the kinds of `plan` in order, each at the same strength and quartile.
    """
    if not plan:
        raise InvalidSpmKindError("A plan needs at least one mutation kind.")
    current: Union[FaultyProgram, MutantProgram] = faulty
    for kind in plan:
        current = apply_spm(current, kind, strength, quartile, provider, rng_seed, allow_partial)
    assert isinstance(current, MutantProgram)
    return current


def build_mutants(
    faulty: FaultyProgram,
    plans: Sequence[Plan],
    strength: int,
    quartile: Quartile,
    provider: ContentProvider,
    rng_seed: int,
    failures: Optional[List[PlanFailure]] = None,
) -> List[MutantProgram]:
    """
    Builds one mutant per plan, sharing intermediate mutants between plans with a common
    prefix. Plans that fail are logged, recorded in `failures` and left out.
    """
    built: Dict[Plan, MutantProgram] = {}
    mutants: List[MutantProgram] = []
    for plan in plans:
        try:
            for depth in range(1, len(plan) + 1):
                prefix = plan[:depth]
                if prefix in built:
                    continue
                parent: Union[FaultyProgram, MutantProgram] = faulty
                if depth > 1:
                    parent = built[prefix[:-1]]
                built[prefix] = apply_spm(
                    parent, prefix[-1], strength, quartile, provider, rng_seed
                )
            mutants.append(built[plan])
        except SpmError as e:
            logger.warning(
                f"Skipping {plan_label(plan)} for fault {faulty.fault.fault_id}: {e.message}"
            )
            if failures is not None:
                failures.append((plan_label(plan), e))
    return mutants


def standard_mutant_set(
    faulty: FaultyProgram,
    strength: int,
    quartile: Quartile,
    provider: ContentProvider,
    rng_seed: int,
    failures: Optional[List[PlanFailure]] = None,
) -> List[MutantProgram]:
    """
    Builds M_c, M_v, M_d, M_f (where supported), M_c(M_v) and M_c(M_v(M_d)).
    """
    plans = standard_plans(faulty.subject_language)
    return build_mutants(faulty, plans, strength, quartile, provider, rng_seed, failures)
