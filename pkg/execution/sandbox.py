"""
This module runs subject programs in subprocesses with wall-clock and resource limits.
"""

import concurrent.futures
import logging
import os
import re
import shutil
import subprocess
import sys
import tempfile
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from execution.errors import RuntimeUnavailableError
from execution.models import ExecutionResult
from source_model.models import SubjectLanguage

logger = logging.getLogger(__name__)

PUBLIC_CLASS = re.compile(r"public\s+(?:final\s+|abstract\s+)*class\s+(\w+)")
ANY_CLASS = re.compile(r"\bclass\s+(\w+)")
MEMORY_LIMIT_BYTES = 1024 * 1024 * 1024
COMPILE_TIMEOUT_FACTOR = 6

# (source_text, language, stdin)
Job = Tuple[str, SubjectLanguage, str]


def java_main_class(source_text: str) -> str:
    """
    Returns the class javac expects the file to be named after.
    """
    match = PUBLIC_CLASS.search(source_text) or ANY_CLASS.search(source_text)
    return match.group(1) if match else "Main"


def _limits(cpu_seconds: int, limit_memory: bool) -> Callable[[], None]:
    def apply() -> None:
        import resource

        resource.setrlimit(resource.RLIMIT_CPU, (cpu_seconds, cpu_seconds))
        if limit_memory:
            resource.setrlimit(resource.RLIMIT_AS, (MEMORY_LIMIT_BYTES, MEMORY_LIMIT_BYTES))

    return apply


class Sandbox:
    """
    Runs programs in throwaway directories with a minimal environment and no inherited
    interpreter state.
    """

    def __init__(self, timeout_s: float = 10, parallel: int = 4) -> None:
        self.timeout_s = timeout_s
        self.parallel = max(1, parallel)

    def available(self, language: SubjectLanguage) -> bool:
        if language == SubjectLanguage.PY:
            return bool(sys.executable)
        return shutil.which("javac") is not None and shutil.which("java") is not None

    def _env(self, workdir: str) -> Dict[str, str]:
        env = {
            "PATH": os.environ.get("PATH", ""),
            "HOME": workdir,
            "LANG": "C.UTF-8",
            "PYTHONHASHSEED": "0",
            "PYTHONDONTWRITEBYTECODE": "1",
        }
        if "JAVA_HOME" in os.environ:
            env["JAVA_HOME"] = os.environ["JAVA_HOME"]
        return env

    def _exec(
        self,
        cmd: List[str],
        workdir: str,
        stdin: str,
        timeout: float,
        limit_memory: bool,
    ) -> ExecutionResult:
        preexec = None
        if os.name == "posix":
            preexec = _limits(4 * int(timeout) + 1, limit_memory)
        try:
            completed = subprocess.run(
                cmd,
                cwd=workdir,
                input=stdin,
                capture_output=True,
                text=True,
                encoding="utf-8",
                errors="replace",
                timeout=timeout,
                env=self._env(workdir),
                preexec_fn=preexec,
            )
        except subprocess.TimeoutExpired:
            return ExecutionResult(exit_code=None, stdout="", stderr="", timed_out=True)
        except OSError as e:
            raise RuntimeUnavailableError(f"Failed to start '{cmd[0]}': {e}")
        return ExecutionResult(completed.returncode, completed.stdout, completed.stderr)

    def run(self, source_text: str, language: SubjectLanguage, stdin: str = "") -> ExecutionResult:
        """
        Runs one program to completion or timeout.
        """
        if not self.available(language):
            raise RuntimeUnavailableError(f"No runtime available for {language.value} programs.")
        with tempfile.TemporaryDirectory(prefix="flrobust-") as workdir:
            if language == SubjectLanguage.PY:
                path = os.path.join(workdir, "program.py")
                with open(path, "w", encoding="utf-8", newline="") as f:
                    f.write(source_text)
                cmd = [sys.executable, "-I", path]
                return self._exec(cmd, workdir, stdin, self.timeout_s, True)

            name = java_main_class(source_text)
            path = os.path.join(workdir, f"{name}.java")
            with open(path, "w", encoding="utf-8", newline="") as f:
                f.write(source_text)
            compiled = self._exec(
                ["javac", "-nowarn", "-encoding", "UTF-8", f"{name}.java"],
                workdir,
                "",
                self.timeout_s * COMPILE_TIMEOUT_FACTOR,
                False,
            )
            if compiled.timed_out or compiled.exit_code != 0:
                logger.debug(f"javac failed for class {name}: {compiled.stderr.strip()[:200]}")
                return ExecutionResult(None, "", compiled.stderr, compiled.timed_out, True)
            return self._exec(
                ["java", "-Xss16m", "-cp", workdir, name], workdir, stdin, self.timeout_s, False
            )

    def run_many(self, jobs: Sequence[Job]) -> List[Optional[ExecutionResult]]:
        """
        Runs jobs on a thread pool; results keep the order of `jobs`. A job whose runtime is
        missing yields None.
        """
        results: List[Optional[ExecutionResult]] = [None] * len(jobs)
        with concurrent.futures.ThreadPoolExecutor(max_workers=self.parallel) as executor:
            futures = {
                executor.submit(self.run, source, language, stdin): position
                for position, (source, language, stdin) in enumerate(jobs)
            }
            for future in concurrent.futures.as_completed(futures):
                try:
                    results[futures[future]] = future.result()
                except RuntimeUnavailableError as e:
                    logger.warning(e.message)
        return results
