"""Versioned encoding of compiled kernels for the on-disk cache.

Private format: a type-tagged JSON tree of the statement/expression
dataclasses. Not a stable interchange format.
"""
from __future__ import annotations

import dataclasses
import json

from . import kast
from .compiler import CompiledKernel
from .errors import CacheCorruption

FORMAT_VERSION = 1

_NODE_CLASSES = {
    cls.__name__: cls
    for cls in (
        kast.TypeAnnotation,
        kast.EConst,
        kast.EName,
        kast.EBin,
        kast.EUn,
        kast.ECmp,
        kast.EIndex,
        kast.ESlice,
        kast.ESize,
        kast.SGate,
        kast.SKernelCall,
        kast.SClassical,
        kast.SPrint,
        kast.SAssign,
        kast.SFor,
        kast.SIf,
        kast.SWithCompute,
        kast.SWithAction,
        kast.SWithDecompose,
        kast.MEye,
        kast.MLit,
        kast.MRef,
        kast.MAssign,
        kast.MItemAssign,
    )
}


def _encode(node):
    if node is None or isinstance(node, (bool, int, float, str)):
        return node
    if isinstance(node, (list, tuple)):
        return {"__seq": [_encode(x) for x in node]}
    cls = type(node)
    if cls.__name__ not in _NODE_CLASSES:
        raise CacheCorruption(f"cannot encode {cls.__name__}")
    return {
        "__t": cls.__name__,
        **{f.name: _encode(getattr(node, f.name)) for f in dataclasses.fields(node)},
    }


def _decode(obj):
    if obj is None or isinstance(obj, (bool, int, float, str)):
        return obj
    if not isinstance(obj, dict):
        raise CacheCorruption(f"bad node {obj!r}")
    if "__seq" in obj:
        return tuple(_decode(x) for x in obj["__seq"])
    tag = obj.get("__t")
    cls = _NODE_CLASSES.get(tag)
    if cls is None:
        raise CacheCorruption(f"unknown node tag {tag!r}")
    fields = {f.name: _decode(obj[f.name]) for f in dataclasses.fields(cls)}
    return cls(**fields)


def kernel_to_bytes(kernel: CompiledKernel) -> bytes:
    doc = {
        "name": kernel.name,
        "params": _encode(kernel.params),
        "digest": kernel.digest,
        "dependencies": list(kernel.dependencies),
        "program": _encode(kernel.program),
        "source": kernel.source,
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()


def kernel_from_bytes(payload: bytes) -> CompiledKernel:
    try:
        doc = json.loads(payload.decode())
        return CompiledKernel(
            name=doc["name"],
            params=_decode(doc["params"]),
            digest=doc["digest"],
            dependencies=tuple(doc["dependencies"]),
            program=_decode(doc["program"]),
            source=doc["source"],
        )
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise CacheCorruption(f"undecodable kernel payload: {exc}") from exc
