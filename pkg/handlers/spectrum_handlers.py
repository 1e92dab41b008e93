import logging

from spectral.extension_calculus import strip_spectrum
from spectral.pencil_core import boundary_spectrum
from spectral.local_chains import partial_multiplicities, singular_chains

from .report_utils import base_report, complex_text

logger = logging.getLogger(__name__)


def spectrum_report(model, tol, strip=None):
    """Граничный спектр в полосе; по умолчанию −ν/2 < Im σ < ν/2."""
    strip = strip or (-model.nu / 2, model.nu / 2)
    points = boundary_spectrum(model, strip, tol)
    rows = []
    for p in points:
        mults = partial_multiplicities(model.p0, p.sigma0, tol)
        rows.append({"sigma0": p.sigma0, "algebraic_mult": p.algebraic_mult, "partial_mults": mults})
    report = base_report("spectrum", tol, model)
    report["strip"] = list(strip)
    report["points"] = rows
    report["dim_E"] = sum(r["algebraic_mult"] for r in rows)
    if not rows:
        report["note"] = "D_min = D_max"
    report["tables"] = {
        "Спектр": (
            ["sigma0", "mult", "mu_j"],
            [[complex_text(r["sigma0"]), r["algebraic_mult"], r["partial_mults"]] for r in rows],
        )
    }
    logger.info(f"Спектр {model.label}: {len(rows)} точек в полосе {strip}")
    return report


def chains_report(model, tol):
    """Частные кратности и ортонормированные старшие коэффициенты по точкам Σ(A)."""
    spectrum = strip_spectrum(model, tol)
    entries = []
    rows = []
    for point in spectrum.Sigma:
        basis = singular_chains(model.p0, point.sigma0, tol)
        entry = basis.to_json()
        entry["leads"] = basis.leads.T
        entry["shift_depth"] = spectrum.N[point.sigma0]
        entries.append(entry)
        for j, mu in enumerate(basis.mults):
            rows.append([complex_text(point.sigma0), j + 1, mu, " ".join(complex_text(z) for z in basis.leads[:, j])])
    report = base_report("chains", tol, model)
    report["points"] = entries
    report["tables"] = {"Цепочки": (["sigma0", "j", "mu_j", "psi_j0"], rows)}
    return report
