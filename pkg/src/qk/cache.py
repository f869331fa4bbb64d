"""The two JIT cache layers.

In memory, identical compile requests short-circuit to the registered
kernel with no parsing or lowering. On disk, compiled programs are keyed
by content digest (canonical source plus dependency digests) so a fresh
process skips lowering for anything it has compiled before. Disk
problems degrade to a miss with a warning, never a failure.
"""
from __future__ import annotations

import hashlib
import json
import os
import tempfile
import time
import warnings
from dataclasses import dataclass, field

from . import kast, lexer, serialize
from .compiler import (
    CompiledKernel,
    KernelRegistry,
    dependency_closure,
    digest_source,
    lower,
    scan_dependencies,
)

ENV_CACHE_DIR = "QK_CACHE_DIR"


def default_cache_dir() -> str:
    env = os.environ.get(ENV_CACHE_DIR)
    if env:
        return env
    xdg = os.environ.get("XDG_CACHE_HOME", os.path.join(os.path.expanduser("~"), ".cache"))
    return os.path.join(xdg, "qk")


@dataclass
class CacheEntry:
    digest: str
    payload: bytes
    created_at: float
    format_version: int = serialize.FORMAT_VERSION


def _checksum(payload: bytes) -> str:
    return hashlib.sha256(payload).hexdigest()


class DiskCache:
    """Content-addressed program store, laid out aa/bb/<digest>.qir."""

    def __init__(self, root: str | None = None):
        self.root = root or default_cache_dir()

    def _path(self, digest: str) -> str:
        return os.path.join(self.root, digest[:2], digest[2:4], f"{digest}.qir")

    def write(self, entry: CacheEntry):
        path = self._path(entry.digest)
        doc = {
            "format_version": entry.format_version,
            "hash_algorithm": "sha256",
            "digest": entry.digest,
            "created_at": entry.created_at,
            "checksum": _checksum(entry.payload),
            "payload": entry.payload.decode(),
        }
        try:
            os.makedirs(os.path.dirname(path), exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path), suffix=".tmp")
            with os.fdopen(fd, "w") as fh:
                json.dump(doc, fh)
            os.replace(tmp, path)
        except OSError as exc:
            warnings.warn(f"qk cache write failed for {entry.digest[:12]}: {exc}")

    def read(self, digest: str) -> CacheEntry | None:
        path = self._path(digest)
        try:
            with open(path, encoding="utf-8") as fh:
                doc = json.load(fh)
        except FileNotFoundError:
            return None
        except (OSError, json.JSONDecodeError) as exc:
            warnings.warn(f"qk cache entry {digest[:12]} unreadable ({exc}); treating as miss")
            return None
        if doc.get("format_version") != serialize.FORMAT_VERSION:
            return None
        payload = str(doc.get("payload", "")).encode()
        if doc.get("digest") != digest or doc.get("checksum") != _checksum(payload):
            warnings.warn(f"qk cache entry {digest[:12]} failed its checksum; treating as miss")
            return None
        return CacheEntry(digest, payload, float(doc.get("created_at", 0.0)))

    def stats(self) -> dict:
        entries = 0
        total = 0
        if os.path.isdir(self.root):
            for dirpath, _, files in os.walk(self.root):
                for name in files:
                    if name.endswith(".qir"):
                        entries += 1
                        total += os.path.getsize(os.path.join(dirpath, name))
        return {"directory": self.root, "entries": entries, "bytes": total}

    def clear(self) -> int:
        removed = 0
        if os.path.isdir(self.root):
            for dirpath, _, files in os.walk(self.root):
                for name in files:
                    if name.endswith(".qir"):
                        os.remove(os.path.join(dirpath, name))
                        removed += 1
        return removed


@dataclass
class CompileReport:
    kernel: CompiledKernel
    provenance: str  # "memory-hit" | "disk-hit" | "compiled"


@dataclass
class JitSession:
    """One process's JIT state: registry, counters and the memory layer."""

    registry: KernelRegistry = field(default_factory=KernelRegistry)
    disk: DiskCache | None = None
    parse_count: int = 0
    lower_count: int = 0
    memory_hits: int = 0
    disk_hits: int = 0
    disk_misses: int = 0
    parse_ns: int = 0
    lower_ns: int = 0
    _request_cache: dict = field(default_factory=dict)
    _source_cache: dict = field(default_factory=dict)  # name -> canonical source

    def jit_compile(self, source: str, dependencies=()) -> CompileReport:
        """Compile one kernel following the rewrite/hash/lookup workflow.

        ``dependencies`` names kernels compiled earlier in this session
        (or loaded from disk); their canonical sources are already cached
        so no re-rewriting happens for them.
        """
        dep_digests = tuple(self.registry.get(d).digest for d in dependencies)
        mem_key = (source, tuple(dependencies), dep_digests)
        if mem_key in self._request_cache:
            self.memory_hits += 1
            name = self._request_cache[mem_key]
            return CompileReport(self.registry.get(name), "memory-hit")
        self.parse_count += 1
        started = time.perf_counter_ns()
        ast = kast.parse_kernel(
            lexer.tokenize(source), known_kernels=self.registry.names()
        )
        self.parse_ns += time.perf_counter_ns() - started
        report = self._jit_one(ast, kast.pretty(ast), tuple(dependencies))
        self._request_cache[mem_key] = report.kernel.name
        return report

    def compile_source(self, text: str) -> list[CompileReport]:
        """Compile every kernel in a source file, dependencies first."""
        file_key = ("file", text)
        cached = self._request_cache.get(file_key)
        if cached is not None and self._still_valid(cached):
            self.memory_hits += 1
            return [
                CompileReport(self.registry.get(name), "memory-hit")
                for name, _, _ in cached
            ]
        self.parse_count += 1
        started = time.perf_counter_ns()
        asts = kast.parse_source(text, known_kernels=self.registry.names())
        self.parse_ns += time.perf_counter_ns() - started
        reports = [self._jit_one(ast, kast.pretty(ast), ()) for ast in asts]
        self._request_cache[file_key] = [
            (
                r.kernel.name,
                r.kernel.digest,
                {d: self.registry.get(d).digest for d in r.kernel.dependencies},
            )
            for r in reports
        ]
        return reports

    def _still_valid(self, entries) -> bool:
        """A memory entry holds as long as its kernels and every pinned
        dependency digest are registered unchanged."""
        for name, digest, deps in entries:
            if name not in self.registry or self.registry.get(name).digest != digest:
                return False
            for dep, dep_digest in deps.items():
                if dep not in self.registry or self.registry.get(dep).digest != dep_digest:
                    return False
        return True

    def _jit_one(self, ast: kast.KernelAST, source: str, extra_deps) -> CompileReport:
        direct = sorted(
            set(scan_dependencies(ast, self.registry.names())) | set(extra_deps)
        )
        closure = dependency_closure(self.registry, direct)
        digest = digest_source(source, [self.registry.get(d).digest for d in closure])
        self._source_cache[ast.name] = source
        kernel = None
        provenance = "compiled"
        if self.disk is not None:
            entry = self.disk.read(digest)
            if entry is not None:
                try:
                    kernel = serialize.kernel_from_bytes(entry.payload)
                    provenance = "disk-hit"
                    self.disk_hits += 1
                except Exception as exc:
                    warnings.warn(f"qk cache payload for {digest[:12]} corrupt: {exc}")
                    kernel = None
            if kernel is None:
                self.disk_misses += 1
        if kernel is None:
            self.lower_count += 1
            started = time.perf_counter_ns()
            kernel = lower(ast, self.registry, extra_deps)
            self.lower_ns += time.perf_counter_ns() - started
            assert kernel.digest == digest
            if self.disk is not None:
                self.disk.write(
                    CacheEntry(kernel.digest, serialize.kernel_to_bytes(kernel), time.time())
                )
        self.registry.register(kernel, direct)
        return CompileReport(kernel, provenance)

    def stats(self) -> dict:
        out = {
            "parse_count": self.parse_count,
            "lower_count": self.lower_count,
            "memory_hits": self.memory_hits,
            "disk_hits": self.disk_hits,
            "disk_misses": self.disk_misses,
        }
        if self.disk is not None:
            out.update(self.disk.stats())
        return out
