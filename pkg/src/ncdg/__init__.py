"""Non-conforming nodal DG for the 2D acoustic conservation equations."""
