import numpy as np


def dense_energies(model: str, g: float, delta: float, eps: float = 0.0, nf: int = 120) -> np.ndarray:
    """Reference spectrum from LAPACK on the plain Fock-basis matrix.

    Independent of the package's own eigensolver; basis |n, up>, |n, down>.
    """
    n = np.arange(nf + 1)
    dim = 2 * (nf + 1)
    h = np.zeros((dim, dim))
    up, dn = 2 * n, 2 * n + 1
    h[up, up] = n - eps / 2
    h[dn, dn] = n + eps / 2
    h[up, dn] = h[dn, up] = -delta / 2
    step = 1 if model == "rabi" else 2
    k = n[: nf + 1 - step]
    amp = np.sqrt(np.prod([k + j for j in range(1, step + 1)], axis=0))
    for spin, sign in ((up, 1.0), (dn, -1.0)):
        h[spin[k + step], spin[k]] = h[spin[k], spin[k + step]] = sign * g * amp
    return np.linalg.eigvalsh(h)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "REPORT", None):
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.REPORT:
        terminalreporter.write_line(line)
