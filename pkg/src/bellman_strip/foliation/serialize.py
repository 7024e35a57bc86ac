"""JSON document format ``foliation/1`` for built foliations.

Grids are stored inline at full precision so a loaded spec evaluates to
the same numbers as the original.  Fans of analytic families are rebuilt
from their closed forms; tabulated fans and chord families are rebuilt
from the stored grids.
"""
from __future__ import annotations

import json
import math

import numpy as np

from ..boundary import BoundaryData, parse_family, table
from ..errors import DomainError
from .chords import Herringbone, _table
from .fans import TangentSolution, infinite_slope
from .patches import AffinePatch, BilinearPatch
from .spec import FoliationSpec, Interface, Piece

FORMAT = "foliation/1"


def _num(x):
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def _unnum(x):
    return float(x) if isinstance(x, str) else x


def _piece_doc(pc: Piece) -> dict:
    fig = pc.fig
    d = {"name": pc.name, "rules": [[c, o, None if v is None else _num(v)] for c, o, v in pc.rules]}
    if isinstance(fig, TangentSolution):
        d.update(type="fan", orientation=fig.orientation, u1=_num(fig.u1), u2=_num(fig.u2),
                 initial=None if fig.initial is None else [float(fig.initial[0]), float(fig.initial[1])],
                 closed=fig.mfun is not None, u=fig.u.tolist(), m=fig.m.tolist())
    elif isinstance(fig, Herringbone):
        ch = fig.chord
        d.update(type="herringbone", ell=ch.ell.tolist(), a=ch.a.tolist(), A=ch.A.tolist(),
                 A0=ch.A0, terminated=ch.terminated)
    else:
        d.update(type="patch", kind=fig.kind, alpha11=fig.alpha11, alpha1=fig.alpha1, alpha0=fig.alpha0)
        if pc.omega is not None:
            o = pc.omega
            d["beta"] = {"kind": o.kind, "beta0": o.beta0, "beta1": o.beta1, "beta2": o.beta2}
    return d


def to_document(spec: FoliationSpec) -> dict:
    bd = spec.bd
    doc = {
        "format": FORMAT,
        "family": bd.spec(),
        "regime": spec.regime,
        "params": {k: (_num(v) if isinstance(v, (int, float)) else v) for k, v in spec.params.items()},
        "pieces": [_piece_doc(pc) for pc in spec.pieces],
        "interfaces": [
            {"i": it.i, "j": it.j, "start": list(it.start), "end": list(it.end),
             "normal": list(it.normal), "kind": it.kind, "label": it.label}
            for it in spec.interfaces
        ],
    }
    if bd.family == "table":
        doc["table"] = {"t": bd.t.tolist(), "f": bd.y.tolist()}
    return doc


def dumps(spec: FoliationSpec, indent=None) -> str:
    return json.dumps(to_document(spec), indent=indent)


def save(spec: FoliationSpec, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(spec))
        fh.write("\n")


def _fan_from_doc(bd: BoundaryData, d: dict) -> TangentSolution:
    u = np.asarray(d["u"], float)
    m = np.asarray(d["m"], float)
    initial = None if d["initial"] is None else tuple(d["initial"])
    mfun = None
    if d.get("closed"):
        base = infinite_slope(bd, d["orientation"])
        if base is None:
            raise DomainError("closed-form fan stored for a family without one")
        if initial is None:
            mfun = base
        else:
            us, ms = initial
            c = ms - float(base(us))
            k = -1.0 if d["orientation"] == "R" else 1.0
            mfun = lambda v, base=base, c=c, us=us, k=k: base(v) + c * np.exp(k * (np.asarray(v, float) - us))
    tmp = TangentSolution(bd, d["orientation"], _unnum(d["u1"]), _unnum(d["u2"]), u, m, np.zeros_like(m), initial, mfun)
    return TangentSolution(bd, tmp.orientation, tmp.u1, tmp.u2, u, m, np.asarray(tmp.m2_at(u), float), initial, mfun)


def from_document(doc: dict) -> FoliationSpec:
    if doc.get("format") != FORMAT:
        raise DomainError(f"unsupported document format {doc.get('format')!r}; expected {FORMAT}")
    if "table" in doc:
        bd = table(doc["table"]["t"], doc["table"]["f"], source=doc["family"])
    else:
        bd = parse_family(doc["family"])
    pieces = []
    for d in doc["pieces"]:
        rules = tuple((c, o, None if v is None else _unnum(v)) for c, o, v in d["rules"])
        omega = None
        if d["type"] == "fan":
            fig = _fan_from_doc(bd, d)
        elif d["type"] == "herringbone":
            ch = _table(bd, d["ell"], d["a"], d.get("terminated", False), np.asarray(d["A"], float), d["A0"])
            fig = Herringbone(ch)
        elif d["type"] == "patch":
            fig = BilinearPatch(d["alpha11"], d["alpha1"], d["alpha0"], d["kind"])
            if d.get("beta"):
                b = d["beta"]
                omega = AffinePatch(b["beta0"], b["beta1"], b["beta2"], b["kind"])
        else:
            raise DomainError(f"unknown piece type {d['type']!r}")
        pieces.append(Piece(d["name"], fig, rules, omega))
    interfaces = tuple(
        Interface(it["i"], it["j"], tuple(it["start"]), tuple(it["end"]), tuple(it["normal"]), it["kind"], it["label"])
        for it in doc["interfaces"]
    )
    params = {k: (_unnum(v) if k not in ("orientation", "side") else v) for k, v in doc["params"].items()}
    return FoliationSpec(bd, doc["regime"], params, tuple(pieces), interfaces)


def loads(text: str) -> FoliationSpec:
    return from_document(json.loads(text))


def load(path: str) -> FoliationSpec:
    with open(path) as fh:
        return loads(fh.read())
