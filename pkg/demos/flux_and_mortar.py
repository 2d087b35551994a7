"""Numerical fluxes and the mortar map on a small non-conforming mesh.

Prints the LDG interface flux for a pressure jump between two materials,
then builds both coupling maps around a refined patch with a 4:1 size ratio
and counts how many neighbouring elements each map sees per interface face.
With k=1 the point-to-point map samples too few points to notice all of them.
"""
import numpy as np

from ncdg.acoustic_dg import lax_friedrichs_flux, ldg_nci_flux
from ncdg.mesh import build_embedded_rect_mesh
from ncdg.nci_coupling import build_mortar_map, build_p2p_map

n = np.array([1.0, 0.0])
p, u = lax_friedrichs_flux(1.0, np.zeros(2), 0.0, np.zeros(2), 1.0, 1.0, n)
print(f"LF flux, unit jump in p, equal media:     p* = {p:.3f}, u* = {u}")
# impedance 1 on the left, 3 on the right
p, u = ldg_nci_flux(1.0, np.zeros(2), 0.0, np.zeros(2), 1.0, 3.0, 1.0, 1 / 3, n)
print(f"LDG flux, unit jump in p, impedances 1|3: p* = {p:.3f}, u* = {u}")

mesh = build_embedded_rect_mesh((0, 0, 0.1, 0.1), (1 / 30, 1 / 30, 2 / 30, 2 / 30), 1 / 30, 1 / 120)


def secondaries_per_face(nci_map):
    return [len(set(nci_map.binding_element[np.isin(nci_map.binding_point, nci_map.face_points(f))]))
            for f in range(len(nci_map.faces))]


for k in (1, 3):
    mortar, p2p = build_mortar_map(mesh, k), build_p2p_map(mesh, k)
    m, q = secondaries_per_face(mortar), secondaries_per_face(p2p)
    print(f"k={k}: {len(m)} NCI faces; secondaries seen per face: mortar {min(m)}..{max(m)}, "
          f"point-to-point {min(q)}..{max(q)}")
    print(f"      mortar covers each face to {np.max(np.abs(mortar.covered_fraction - 1)):.1e}")
