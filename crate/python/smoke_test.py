"""Quick end-to-end check of the Python bindings."""

import cmath
import math

import dilute


def main():
    e0 = dilute.EnergyPoint.from_energy(0.0)
    law = dilute.ImpurityLaw.dirac(2.0)
    assert e0.rational is None
    half = dilute.EnergyPoint.from_rational(1, 2)
    assert half.rational == (1, 2) and half.energy == 0.0

    t = dilute.transfer(half, 2.0)
    assert t == [[2.0, -1.0], [1.0, 0.0]]

    lam = dilute.expansion_eigenvalue(e0, 2.0)
    g = dilute.gamma_hat_infinity(e0, law)
    assert abs(g - math.log((math.sqrt(lam) + 1 / math.sqrt(lam)) / 2)) < 1e-12
    print(f"gamma_hat_inf(E=0) = {g:.6f}")

    a, envelope = dilute.fourier_a(e0, law, m_max=16)
    assert abs(a[0].real - g) < 1e-10 and envelope is not None

    spec, trunc = dilute.gamma_hat_q_spectral(half, law, q=2, n_max=32)
    hat = dilute.gamma_hat_mc(half, law, q=2, steps=200_000, seed=3)
    assert abs(spec - hat.value) < 4 * hat.std_error + trunc
    print(f"gamma_hat_2 spectral {spec:.5f}, hat chain {hat}")

    golden = dilute.EnergyPoint.from_k(math.pi * (math.sqrt(5) - 1) / 2)
    d = dilute.DisorderSpec(0.05, law)
    t1 = dilute.gamma_mc(golden, d, steps=200_000, seed=5)
    t2 = dilute.gamma_mc(golden, d, steps=200_000, seed=5, estimator="matrix")
    assert abs(t1.value - t2.value) < 3 * math.hypot(t1.std_error, t2.std_error)
    print(f"gamma/rho at golden k: {t1.value / d.rho:.4f} +- {t1.std_error / d.rho:.4f}")

    clean = dilute.DisorderSpec(0.0, law)
    assert dilute.dos_rotation(golden, clean, steps=20_000).value == golden.k
    rot = dilute.dos_rotation(golden, d, steps=200_000)
    eig = dilute.dos_eigencount(golden, d, box_size=2000, replicas=4)
    assert abs(rot.value - eig.value) < 0.02
    assert abs(dilute.dos_lowdensity(golden, d) - rot.value) < 0.01

    third = dilute.EnergyPoint.from_rational(1, 3)
    j = dilute.harmonic_system(third, law, q=3, n_max=32)
    assert abs(j[0]) < 1 and not cmath.isnan(j[0])
    sums = dilute.oscillatory_sums(third, d, m_max=3, steps=100_000)
    assert len(sums) == 3

    assert dilute.classify_k(math.pi / 3) == (1, 3)
    assert dilute.classify_k(golden.k) is None

    for bad in (lambda: dilute.EnergyPoint.from_k(4.0), lambda: dilute.ImpurityLaw.parse("2:-1")):
        try:
            bad()
        except ValueError:
            pass
        else:
            raise AssertionError("expected ValueError")
    print("smoke test ok")


if __name__ == "__main__":
    main()
