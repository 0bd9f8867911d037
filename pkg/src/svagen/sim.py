"""Workspace composition and simulator adapters."""
from __future__ import annotations

import os
import re
import shutil
import signal
import subprocess
import tempfile
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

from .sva.suite import AssertionSuite
from .triage import PatternPack, SimTime
from .triage import report_sim_time as _scan_sim_time

ASSERTION_FILE = "generated_assertions.sv"
LOG_FILE = "sim.log"
PHASE_SEPARATOR = "### PHASE: {}\n"
KILL_GRACE_S = 1.0


class SimulationError(Exception):
    pass


class IoFailure(SimulationError):
    pass


class BindTemplateMissing(SimulationError):
    pass


class SimulatorNotFound(SimulationError):
    pass


class CrashWithoutOutput(SimulationError):
    pass


class SimulationTimeout(SimulationError):
    def __init__(self, message: str, log: "SimulationLog"):
        super().__init__(message)
        self.log = log


@dataclass(frozen=True)
class DesignBundle:
    design_files: tuple[Path, ...]
    testbench_file: Path
    top_module: str
    testcase_description: str = ""
    bind_template: Optional[Path] = None

    def __post_init__(self):
        object.__setattr__(self, "design_files", tuple(Path(p) for p in self.design_files))
        object.__setattr__(self, "testbench_file", Path(self.testbench_file))
        if not self.top_module:
            raise ValueError("top_module must be non-empty")


@dataclass(frozen=True)
class SimulationLog:
    raw_text: str
    exit_code: int
    wall_time: float = 0.0  # seconds


@dataclass(frozen=True)
class Workspace:
    path: Path
    # assertion name -> (first line, last line) inside the assertion file
    line_map: dict = field(default_factory=dict)


def default_bind_template() -> str:
    return resources.files("svagen.data.templates").joinpath("bind_default.sv.tmpl").read_text("utf-8")


def render_assertion_file(suite: AssertionSuite, top: str, template: str) -> tuple[str, dict]:
    if "{{assertions}}" not in template:
        raise BindTemplateMissing("bind template has no {{assertions}} placeholder")
    head, tail = template.split("{{assertions}}", 1)
    head = head.replace("{{top}}", top)
    tail = tail.replace("{{top}}", top)
    line = head.count("\n") + 1
    chunks = []
    line_map = {}
    for a in suite.assertions:
        chunk = a.to_sva()
        first = line + (1 if a.comment else 0)
        last = line + chunk.count("\n") - 1
        line_map[a.name] = (first, last)
        chunks.append(chunk)
        line += chunk.count("\n") + 1  # blank separator line
    body = "\n".join(chunks)
    return head + body + tail, line_map


def compose_workspace(bundle: DesignBundle, suite: AssertionSuite,
                      dest: Optional[Path] = None) -> Workspace:
    """Copy design + testbench into a fresh directory next to the generated assertions."""
    for p in (*bundle.design_files, bundle.testbench_file):
        if not p.is_file() or not os.access(p, os.R_OK):
            raise IoFailure(f"cannot read {p}")
    if bundle.bind_template is not None:
        if not Path(bundle.bind_template).is_file():
            raise BindTemplateMissing(str(bundle.bind_template))
        template = Path(bundle.bind_template).read_text(encoding="utf-8")
    else:
        template = default_bind_template()
    text, line_map = render_assertion_file(suite, bundle.top_module, template)
    try:
        if dest is None:
            root = Path(tempfile.mkdtemp(prefix="sva_ws_"))
        else:
            root = Path(dest)
            root.mkdir(parents=True, exist_ok=False)
        (root / "rtl").mkdir()
        (root / "tb").mkdir()
        for p in bundle.design_files:
            shutil.copyfile(p, root / "rtl" / p.name)
        shutil.copyfile(bundle.testbench_file, root / "tb" / bundle.testbench_file.name)
        (root / ASSERTION_FILE).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    return Workspace(root, line_map)


class SimulatorAdapter:
    identity = "abstract"

    def run(self, workspace: Workspace, timeout: float, iteration: int = 0) -> SimulationLog:
        raise NotImplementedError


def _fill(argv: Sequence[str], workspace: Path, top: str) -> list[str]:
    return [a.replace("{{workspace}}", str(workspace)).replace("{{top}}", top) for a in argv]


def _kill_group(proc: subprocess.Popen) -> None:
    try:
        os.killpg(proc.pid, signal.SIGTERM)
    except ProcessLookupError:
        return
    try:
        proc.wait(KILL_GRACE_S)
    except subprocess.TimeoutExpired:
        try:
            os.killpg(proc.pid, signal.SIGKILL)
        except ProcessLookupError:
            pass


@dataclass(frozen=True)
class ExternalAdapter(SimulatorAdapter):
    """Runs a compile command then a run command inside the workspace."""
    compile_cmd: tuple[str, ...]
    run_cmd: tuple[str, ...] = ()
    top: str = "top"
    identity: str = "external"

    def run(self, workspace: Workspace, timeout: float, iteration: int = 0) -> SimulationLog:
        start = time.monotonic()
        deadline = start + timeout
        parts: list[str] = []
        exit_code = 0
        for phase, argv in (("compile", self.compile_cmd), ("run", self.run_cmd)):
            if not argv:
                continue
            output, exit_code, timed_out = self._step(_fill(argv, workspace.path, self.top), workspace.path, deadline)
            if output:
                parts.append(PHASE_SEPARATOR.format(phase) + output + ("" if output.endswith("\n") else "\n"))
            if timed_out:
                log = SimulationLog("".join(parts), exit_code, time.monotonic() - start)
                _persist(workspace, log)
                raise SimulationTimeout(f"{phase} step exceeded {timeout:.1f}s", log)
            if exit_code != 0:
                break
        log = SimulationLog("".join(parts), exit_code, time.monotonic() - start)
        if exit_code < 0 and not log.raw_text:
            raise CrashWithoutOutput(f"simulator killed by signal {-exit_code} without output")
        _persist(workspace, log)
        return log

    @staticmethod
    def _step(argv: list[str], cwd: Path, deadline: float) -> tuple[str, int, bool]:
        try:
            proc = subprocess.Popen(argv, cwd=cwd, stdout=subprocess.PIPE, stderr=subprocess.STDOUT,
                                    stdin=subprocess.DEVNULL, start_new_session=True)
        except FileNotFoundError:
            raise SimulatorNotFound(argv[0]) from None
        except PermissionError as exc:
            raise SimulatorNotFound(f"{argv[0]}: {exc}") from None
        try:
            out, _ = proc.communicate(timeout=max(0.0, deadline - time.monotonic()))
            return out.decode("utf-8", errors="replace"), proc.returncode, False
        except subprocess.TimeoutExpired:
            _kill_group(proc)
            try:
                out, _ = proc.communicate(timeout=KILL_GRACE_S)
            except subprocess.TimeoutExpired:
                # a grandchild escaped the group and still holds the pipe
                proc.kill()
                out = b""
            return (out or b"").decode("utf-8", errors="replace"), proc.returncode if proc.returncode is not None else -9, True


@dataclass(frozen=True)
class ReplayAdapter(SimulatorAdapter):
    """Returns ``iter<N>.log`` from a directory; ``iter<N>.exit`` optionally holds the exit code."""
    replay_dir: Path
    identity: str = "replay"

    def run(self, workspace: Optional[Workspace], timeout: float = 0, iteration: int = 0) -> SimulationLog:
        start = time.monotonic()
        path = Path(self.replay_dir) / f"iter{iteration}.log"
        if not path.is_file():
            raise SimulatorNotFound(f"no canned log {path}")
        raw = path.read_bytes().decode("utf-8", errors="replace")
        exit_path = path.with_suffix(".exit")
        exit_code = int(exit_path.read_text().strip()) if exit_path.is_file() else 0
        log = SimulationLog(raw, exit_code, time.monotonic() - start)
        if workspace is not None:
            _persist(workspace, log)
        return log


def _persist(workspace: Workspace, log: SimulationLog) -> None:
    try:
        (workspace.path / LOG_FILE).write_text(log.raw_text, encoding="utf-8")
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


def run_simulation(workspace: Workspace, adapter: SimulatorAdapter, timeout: float,
                   iteration: int = 0) -> SimulationLog:
    return adapter.run(workspace, timeout, iteration)


_PLACEHOLDER_RE = re.compile(r"\{\{(\w+)\}\}")


def check_recipe(argv: Sequence[str]) -> None:
    for a in argv:
        for name in _PLACEHOLDER_RE.findall(a):
            if name not in ("workspace", "top"):
                raise ValueError(f"unknown placeholder {{{{{name}}}}} in adapter command")


def report_sim_time(log: SimulationLog, pack: PatternPack) -> Optional[SimTime]:
    """Simulated time at end of run, or None when the log never reports it."""
    return _scan_sim_time(log.raw_text, pack)
