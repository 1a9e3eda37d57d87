"""
This module builds the fault-localization prompt and extracts predicted lines from replies.
"""

import re
from typing import Optional

from gateway.models import FaultLocTask
from source_model.models import SubjectLanguage

PROMPT_TEMPLATE = (
    "This code is designed to meet the following specification: {spec} "
    "However, the code produces incorrect output. "
    "Can you identify the specific line of code responsible for the error? "
    "The program is attached below.\n"
    "\n"
    "```{fence}\n"
    "{code}\n"
    "```\n"
    "\n"
    "Line 1 is the first line of the program and blank lines are counted. "
    "Finish your reply with a final line of the form FAULT_LINE: <integer>."
)
FENCES = {SubjectLanguage.PY: "python", SubjectLanguage.JAVA: "java"}

MARKER = re.compile(r"FAULT_LINE\s*[:=]\s*\**\s*(-?\d+)", re.IGNORECASE)
LINE_MENTION = re.compile(r"\bline\s*(?:number\s*)?[:#]?\s*(\d+)", re.IGNORECASE)


def build_prompt(task: FaultLocTask) -> str:
    """
    Renders the single fixed prompt. The code is embedded verbatim, without line numbers.
    """
    spec = " ".join(task.spec_text.split())
    code = task.source_text[:-1] if task.source_text.endswith("\n") else task.source_text
    return PROMPT_TEMPLATE.format(spec=spec, fence=FENCES[task.subject_language], code=code)


def parse_answer(raw_text: str, line_count: int) -> Optional[int]:
    """
    Returns the predicted line, or None when the reply names no line inside the program.
    The last FAULT_LINE marker wins; without one, the last "line N" mention is used.
    """
    markers = MARKER.findall(raw_text)
    if markers:
        candidate = int(markers[-1])
    else:
        mentions = LINE_MENTION.findall(raw_text)
        if not mentions:
            return None
        candidate = int(mentions[-1])
    if 1 <= candidate <= line_count:
        return candidate
    return None
