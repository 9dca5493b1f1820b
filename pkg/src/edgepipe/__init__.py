"""Simulation and scheduling of data-science pipelines on edge/data-centre pools."""
