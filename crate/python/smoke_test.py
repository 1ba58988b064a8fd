"""Smoke test for the dboson extension module.

Build and install first:
    cd crates/python && maturin build --release -o dist && pip install dist/dboson-*.whl
"""

import cmath
import math

import dboson


def check(cond, what):
    if not cond:
        raise SystemExit(f"FAIL: {what}")
    print(f"ok: {what}")


def main():
    std = dboson.DeformationSpec.standard(hbar=1.0, level_cap=16)
    t = std.ladder_table()
    check(t.spectrum[:3] == [0.5, 1.5, 2.5], "standard spectrum")

    qp = dboson.DeformationSpec.qp(2.0, 1.0, level_cap=16)
    tq = qp.ladder_table()
    check(tq.ladder[:4] == [0.0, 1.0, 3.0, 7.0], "qp ladder function")
    check(dboson.DeformationSpec.from_json(qp.to_json()).to_json() == qp.to_json(), "spec json round trip")

    a, ad = tq.generator("A"), tq.generator("A+")
    comm = a.commutator(ad).matrix()
    check(all(abs(comm[n][n] - tq.f[n]) <= 1e-14 * tq.ladder[n + 1] for n in range(15)), "[A, A+] = f(N) on the interior")
    check(tq.basis(0, 1) * tq.basis(1, 2) == tq.basis(0, 2), "eigenstate product")

    x = tq.monomial(2, 1)
    back = x.sigma().sigma_inverse()
    check((back - x).restrict(8).max_abs() < 1e-10, "sigma round trip")

    m = dboson.EquivalenceMap(tq, t)
    check(m.invertible and abs(m.k_values[2] - math.sqrt(7 / 3)) < 1e-15, "bosonisation factors")
    fixture = dboson.DeformationSpec.table([1.0, 0.0, -1.0]).ladder_table()
    bad = dboson.EquivalenceMap(fixture, dboson.DeformationSpec.standard(level_cap=3).ladder_table())
    check(bad.first_defect == 3, "degenerate fixture detected")
    try:
        fixture.basis(0, 0).sigma_inverse()
        check(False, "sigma_inverse on fixture raises")
    except dboson.DbosonError as e:
        check("level 3" in str(e), "sigma_inverse on fixture raises")

    check(dboson.omega_at(0, 0, 0.0, 0.0, 1.0) == 2.0, "vacuum Wigner function at the origin")
    ip = dboson.quadrature_ip(1, 0, 1, 0, hbar=1.0, points=256)
    check(abs(ip - 1.0) < 1e-8, "Wigner orthonormality by quadrature")

    rho = tq.zero()
    for n, m_, c in [(0, 0, 0.5), (1, 1, 0.5), (0, 1, 0.25), (1, 0, 0.25)]:
        rho.add_term(n, m_, complex(c))
    d = dboson.DensitySpec(rho)
    later = d.evolve(2.0)
    check(later.coefficients()[0][1] == 0.25 * cmath.exp(1j * 1.5 * 2.0), "evolution phase")
    check(later.expectation(tq.generator("H")) == d.expectation(tq.generator("H")), "energy conserved")

    report = dboson.run_verify(qp, 12)
    check(report["passed"] and len(report["checks"]) == 6, "verify report")

    slope, _ = dboson.commutator_order_check([0.0, 0.0, 0.0, 1.0], 1.0, [1e-1, 1e-2, 1e-3])
    check(abs(slope - 3.0) < 0.05, "classical-limit slope")
    integral, expansion = dboson.quantize_bracket([0.0, 0.0, 3.0], 1.0, 0.1)
    check(abs(integral - (1.05**3 - 0.95**3)) < 1e-12, "quantisation integral")
    print("all smoke checks passed")


if __name__ == "__main__":
    main()
