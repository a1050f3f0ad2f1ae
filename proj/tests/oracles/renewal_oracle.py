"""Independent oracle values for the renewal and theory tests.

Uses mpmath / numpy only; nothing here shares code with the C++ library.
Run: python3 tests/oracles/renewal_oracle.py
"""
import numpy as np
import mpmath as mp

mp.mp.dps = 30


def pmf(beta, n):
    n = np.asarray(n, dtype=np.float64)
    return n ** (-beta) - (n + 1) ** (-beta)


def renewal_mass(beta, kmax):
    f = np.zeros(kmax + 1)
    f[1:] = pmf(beta, np.arange(1, kmax + 1))
    u = np.zeros(kmax + 1)
    u[0] = 1.0
    for k in range(1, kmax + 1):
        u[k] = np.dot(f[1:k + 1], u[k - 1::-1])
    return u


def q_bracket(beta, p, N):
    u = renewal_mass(beta, N)
    s = np.sum(u ** p)
    bp = p * beta - p + 1
    n = np.arange(N // 2 + 1, N + 1)
    c = np.max(u[n] / n ** (beta - 1.0)) ** p
    tail = c * N ** bp / (-bp)
    return 1.0 / (s + tail), 1.0 / s


if __name__ == "__main__":
    u = renewal_mass(0.5, 4)
    print("u beta=.5", [repr(x) for x in u])
    u = renewal_mass(0.25, 20)
    print("u beta=.25 k<=20", [repr(x) for x in u])
    for b in (0.25, 0.5, 0.75):
        print("w_2", b, repr(float(sum(mp.mpf(k + 1) ** (-b) for k in range(3)))))
    print("gamma(.25)", mp.gamma(0.25), "gamma(.75)", mp.gamma(0.75))
    print("asym b=.25 k=16", mp.mpf(16) ** (-0.75) / (mp.gamma(0.25) * mp.gamma(0.75)))
    print("F2 asym b=.75", (mp.gamma(0.75) * mp.gamma(0.25)) ** 2 / (mp.gamma(0.5) ** 2))
    for N in (4096, 16384, 65536):
        lo, hi = q_bracket(0.25, 2, N)
        print("q bracket beta=.25 p=2 N=", N, repr(lo), repr(hi), hi - lo)
