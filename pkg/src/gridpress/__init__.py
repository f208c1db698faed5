"""Gas transmission network control workbench.

Subpackages:
    core        network graph, gas property formulas, unit handling
    sim         steady-state and transient hydraulic solver, fuel model
    estimation  measurement ingestion and initial state estimation
    forecast    demand profiles, nominations, exogenous input assembly
    optimizer   Powell-based simulation-optimization with caching
    regulation  fast PID layer, machine load balancing, mileage tracking
    service     persistence, scheduler, CLI and HTTP API
"""

__version__ = "0.1.0"
