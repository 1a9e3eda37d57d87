"""
This module injects single-line faults into seed programs.
"""

import logging
from typing import List, Optional, Sequence, Set, Tuple

import numpy as np

from corpus.models import SeedProgram
from faults.errors import FaultInjectionError, FaultIntegrityError, NoApplicableSiteError
from faults.models import FaultKind, FaultSite, FaultyProgram, InjectedFault
from faults.sites import ARITH_SWAPS, BOOLEAN_SWAPS, discover_fault_sites
from source_model.editing import apply_edits
from source_model.errors import ParseFailureError
from source_model.frontends.java_frontend import default_return_statement
from source_model.models import Edit, Quartile, SubjectLanguage
from source_model.parser import parse_source
from source_model.utils import LineMap, content_hash, quartile_of, stable_rng

logger = logging.getLogger(__name__)

DedupKey = Tuple[str, FaultKind, int, str]


def _perturbed_bound(site: FaultSite, direction: int) -> str:
    if site.int_value is not None:
        return str(site.int_value + direction)
    sign = "+" if direction > 0 else "-"
    if site.atomic:
        return f"{site.text} {sign} 1"
    return f"({site.text}) {sign} 1"


def _fault_edit(site: FaultSite, language: SubjectLanguage, rng: np.random.Generator) -> Edit:
    if site.kind == FaultKind.misplaced_return:
        if site.boundary is None:
            raise FaultIntegrityError(f"MisplacedReturn site at line {site.line} has no boundary.")
        if language == SubjectLanguage.PY:
            statement = "return"
        else:
            statement = f"if (true) {default_return_statement(site.boundary.return_type)}"
        return Edit.insert_before(site.line, (site.boundary.indent + statement,))
    if site.span is None:
        raise FaultIntegrityError(f"{site.kind.value} site at line {site.line} has no span.")
    if site.kind == FaultKind.off_by_one:
        direction = 1 if int(rng.integers(2)) == 1 else -1
        return Edit.replace(site.span, _perturbed_bound(site, direction))
    swaps = BOOLEAN_SWAPS if site.kind == FaultKind.incorrect_boolean_logic else ARITH_SWAPS
    return Edit.replace(site.span, swaps[site.text])


def inject_fault(
    program: SeedProgram, kind: FaultKind, quartile: Quartile, rng_seed: int
) -> FaultyProgram:
    """
    Injects one fault of `kind` at a site chosen uniformly among the sites in `quartile`.
    Identical arguments always produce the same faulty source.
    """
    index = parse_source(program.source_text, program.subject_language)
    sites = [
        site
        for site in discover_fault_sites(index, kind)
        if quartile_of(site.line, index.line_count) == quartile
    ]
    if not sites:
        raise NoApplicableSiteError(kind.value, quartile.value)

    rng = stable_rng("fault", program.seed_id, kind.value, quartile.value, rng_seed)
    site = sites[int(rng.integers(len(sites)))]
    edit = _fault_edit(site, program.subject_language, rng)
    faulty_source, _ = apply_edits(program.source_text, [edit])
    try:
        parse_source(faulty_source, program.subject_language)
    except ParseFailureError as e:
        raise FaultIntegrityError(
            f"{kind.value} at line {site.line} of '{program.seed_id}' broke parsing: {e.message}"
        )

    before = LineMap(program.source_text).line_text(site.line).strip()
    after = LineMap(faulty_source).line_text(site.line).strip()
    fault = InjectedFault(
        fault_id=content_hash(program.seed_id, kind.value, site.line, after, faulty_source),
        seed_id=program.seed_id,
        subject_language=program.subject_language,
        kind=kind,
        fault_line=site.line,
        original_line=site.line,
        quartile=quartile,
        before_snippet=before,
        after_snippet=after,
        rng_seed=rng_seed,
        faulty_source=faulty_source,
    )
    logger.debug(f"Injected {kind.value} into '{program.seed_id}' at line {site.line}: {after}")
    return FaultyProgram(fault=fault, seed=program)


def _attempt_seed(rng_seed: int, attempt: int) -> int:
    if attempt == 0:
        return rng_seed
    return int(content_hash(rng_seed, attempt, length=8), 16)


def _faults_for(
    seed: SeedProgram,
    kind: FaultKind,
    quartile: Quartile,
    per_combination: int,
    rng_seed: int,
    attempts: int,
    seen: Set[DedupKey],
) -> List[FaultyProgram]:
    produced: List[FaultyProgram] = []
    for attempt in range(attempts):
        if len(produced) == per_combination:
            break
        try:
            faulty = inject_fault(seed, kind, quartile, _attempt_seed(rng_seed, attempt))
        except NoApplicableSiteError:
            logger.info(f"No {kind.value} site in {quartile.value} of '{seed.seed_id}'")
            break
        except FaultIntegrityError as e:
            logger.warning(e.message)
            continue
        key = (seed.seed_id, kind, faulty.fault.fault_line, faulty.fault.after_snippet)
        if key not in seen:
            seen.add(key)
            produced.append(faulty)
    return produced


def generate_fault_tasks(
    seeds: Sequence[SeedProgram],
    kinds: Sequence[FaultKind],
    quartiles: Sequence[Quartile],
    per_combination: int,
    rng_seed: int,
    max_attempts: Optional[int] = None,
) -> List[FaultyProgram]:
    """
    Injects up to `per_combination` distinct faults for every (seed, kind, quartile).
    Combinations without sites are logged and skipped.
    """
    if per_combination < 1:
        raise FaultInjectionError(f"per_combination must be at least 1, got {per_combination}.")
    attempts = max_attempts or 4 * per_combination + 4
    generated: List[FaultyProgram] = []
    seen: Set[DedupKey] = set()
    for seed in seeds:
        for kind in kinds:
            for quartile in quartiles:
                generated.extend(
                    _faults_for(seed, kind, quartile, per_combination, rng_seed, attempts, seen)
                )
    logger.info(f"Generated {len(generated)} faulty programs from {len(seeds)} seeds")
    return generated
