"""Quasi-static bond-based peridynamic fracture solver (2D)."""

from ._core import (
    BeamGeometry,
    DiskGeometry,
    InvariantError,
    Material,
    Mesh,
    ParseError,
    PlateGeometry,
    SingularSystemError,
    calibrate_tau0,
    check,
    export_vtk,
    make_material,
    pe_pairs,
    rect_mesh,
    run_config_file,
    run_config_text,
    set_log_level,
    specimen_mesh,
    stiffness,
)


def stiffness_matrix(mesh, material, threads=1):
    """Global stiffness as a scipy.sparse CSR matrix."""
    from scipy.sparse import csr_matrix

    indptr, indices, data, n = stiffness(mesh, material, threads)
    return csr_matrix((data, indices, indptr), shape=(n, n))


__all__ = [name for name in dir() if not name.startswith("_")]
