"""Smoke test for the `dynspec` Python extension.

Build the extension first, either with maturin (`maturin develop -m
crates/py/Cargo.toml`) or with cargo:

    cargo build --release -p dynspec-py --features extension-module

When `dynspec` is not importable, the script loads the cargo build output
from target/release or target/debug directly.
"""

import importlib.machinery
import importlib.util
import json
import sys
from fractions import Fraction
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load_dynspec():
    try:
        import dynspec

        return dynspec
    except ImportError:
        pass
    names = ["libdynspec.so", "libdynspec.dylib", "dynspec.dll"]
    for profile in ["release", "debug"]:
        for name in names:
            path = ROOT / "target" / profile / name
            if path.exists():
                loader = importlib.machinery.ExtensionFileLoader("dynspec", str(path))
                spec = importlib.util.spec_from_loader("dynspec", loader)
                module = importlib.util.module_from_spec(spec)
                loader.exec_module(module)
                sys.modules["dynspec"] = module
                return module
    sys.exit("dynspec extension not found; build it first (see the module docstring)")


ds = load_dynspec()

LEHMER = [1, 1, 0, -1, -1, -1, -1, -1, 0, 1, 1]
S4 = [1, -1, -1, -1, 1]

# Salem certification
report = ds.is_salem(LEHMER)
assert report["salem"], report
assert report["certificate"]["degree"] == 10
phi5 = ds.is_salem([1, 1, 1, 1, 1])
assert not phi5["salem"] and phi5["code"] == "wrong_root_pattern"
s4 = ds.Polynomial(S4)
assert s4.degree == 4 and s4.discriminant() == -507
assert ds.Polynomial([-1, 1]).resultant([1, 1]) == 2
assert s4.power_min_poly(2).degree == 4

# realizability decisions
d = ds.stable_realizable(LEHMER, "enriques")
assert d["realizable"] and d["reason"] == "clause (2): d = b2, square class"
assert ds.stable_realizable(LEHMER, "k3", projective=True)["realizable"]
assert not ds.stable_realizable(LEHMER, "torus")["realizable"]
assert ds.rational_isometry_criterion(S4, "3U")["exists"]

# lattices and gluing
u = ds.Lattice([[-2]]).glue([[2]])
assert u is not None and u.determinant == -1 and u.is_even()
e8 = ds.Lattice.named("E6").glue("A2")
assert e8.rank == 8 and len(e8.roots()) == 240
assert ds.Lattice.named("3U+2E8").signature == (3, 19)
assert ds.Lattice.from_json(e8.to_json()) == e8

# isometries, twists and positivity
f = ds.Isometry.companion([1, -3, 1], [[2, 3], [3, 2]])
assert f.charpoly() == ds.Polynomial([1, -3, 1])
pos = f.is_positive()
assert pos["status"] == "not_positive"
root = [int(x) for x in pos["witnesses"][0]["root"]]
g = [[2, 3], [3, 2]]
assert sum(root[i] * g[i][j] * root[j] for i in range(2) for j in range(2)) == -2
twisted = f.twist([11])
assert twisted.lattice.gram == [[22, 33], [33, 22]]
assert twisted.is_positive()["method"] == "determinant_bound"
split = f.twist_split_check([41], 1, 41)
assert split["passed"] and split["p_valuation"] == 2

h = ds.Isometry([[2, 6], [6, 8]], [[0, -2], [Fraction(1, 2), 3]])
n, hn = h.power_to_integral()
assert hn.is_integral() and not h.is_integral() and n > 1
assert (h ** n) == hn
assert ds.Isometry.from_json(h.to_json()) == h

# local symbols
assert ds.legendre(2, 7) == 1 and ds.legendre(3, 7) == -1
assert ds.hilbert_symbol(-1, -1) == -1 and ds.hilbert_symbol(-1, -1, 2) == -1
assert ds.hilbert_symbol(Fraction(2, 3), 5, 3) == ds.hilbert_symbol(6, 5, 3)

# errors surface as DynspecError (a ValueError)
try:
    ds.stable_realizable([1, 1, 1, 1, 1], "k3")
except ds.DynspecError as e:
    assert isinstance(e, ValueError)
else:
    raise AssertionError("non-Salem input accepted")

# end-to-end certificate
cert = ds.Certificate.build(S4, "k3")
assert cert.kernel_signature == (1, 3) and cert.projective
result = cert.verify()
assert result["verified"], [i for i in result["items"] if not i["passed"]]
again = ds.Certificate.from_json(cert.to_json())
assert json.loads(again.to_json()) == json.loads(cert.to_json())
torus = ds.Certificate.build(S4, "torus")
assert torus.isometry.mod2_trivial() and torus.verify()["verified"]

print(f"dynspec smoke test passed (K3 certificate: power {cert.power})")
