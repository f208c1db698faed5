"""Fast regulation layer: PID, machine load split, mileage, setpoint task."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridpress.core.network import Machine
from gridpress.regulation.balance import InfeasibleLoadError, balance_machines
from gridpress.regulation.mileage import (MachineLedger, mileage_suggestion)
from gridpress.regulation.pid import PidConfig, PidState, pid_update
from gridpress.regulation.setpoints import RegulationConfig, Regulator

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)


class TestPid:
    @given(st.lists(finite, min_size=1, max_size=50), finite)
    @settings(max_examples=100, deadline=None)
    def test_output_always_within_limits(self, measurements, setpoint):
        cfg = PidConfig(kp=2.0, ki=0.5, kd=0.1, out_min=-3.0, out_max=7.0)
        state = PidState()
        for m in measurements:
            out, state = pid_update(cfg, state, setpoint, m, 1.0)
            assert cfg.out_min <= out <= cfg.out_max

    @given(st.lists(finite, min_size=2, max_size=50))
    @settings(max_examples=100, deadline=None)
    def test_integrator_frozen_while_winding_up(self, measurements):
        # sustained positive error with a saturated output must not let the
        # integral keep growing
        cfg = PidConfig(kp=1.0, ki=1.0, out_min=-1.0, out_max=1.0)
        state = PidState()
        bound = 1.0 + 1e-9
        for m in measurements:
            out, state = pid_update(cfg, state, 1e9, m, 1.0)
            assert state.integral <= bound

    def test_proportional_only_step(self):
        cfg = PidConfig(kp=0.5)
        out, _ = pid_update(cfg, PidState(), 10.0, 6.0, 1.0)
        assert out == pytest.approx(2.0)

    def test_derivative_on_measurement_not_setpoint(self):
        cfg = PidConfig(kp=0.0, kd=5.0)
        _, state = pid_update(cfg, PidState(), 0.0, 3.0, 1.0)
        # setpoint jumps, measurement unchanged: no derivative kick
        out, _ = pid_update(cfg, state, 100.0, 3.0, 1.0)
        assert out == 0.0
        # measurement moves: derivative opposes the movement
        out, _ = pid_update(cfg, state, 0.0, 4.0, 1.0)
        assert out == pytest.approx(-5.0)

    def test_invalid_dt_rejected(self):
        with pytest.raises(ValueError):
            pid_update(PidConfig(kp=1.0), PidState(), 0.0, 0.0, 0.0)
        with pytest.raises(ValueError):
            PidConfig(kp=1.0, out_min=1.0, out_max=-1.0)

    def test_closed_loop_settles_within_five_time_constants(self):
        # first-order plant, unit gain, tau = 100 s, 2% settling band
        cfg = PidConfig(kp=0.8, ki=0.02, out_min=-10.0, out_max=10.0)
        state = PidState()
        x, dt, tau, sp = 0.0, 1.0, 100.0, 1.0
        settle = None
        for k in range(1000):
            u, state = pid_update(cfg, state, sp, x, dt)
            x += dt * (u - x) / tau
            if abs(x - sp) <= 0.02 * sp:
                settle = settle if settle is not None else (k + 1) * dt
            else:
                settle = None
        assert settle is not None and settle <= 5 * tau


MACHINES = (Machine("M1", 10_000.0, 60_000.0, 1.5, 0.8, 0.34),
            Machine("M2", 10_000.0, 40_000.0, 1.5, 0.8, 0.34))


class TestBalanceMachines:
    def test_equal_split_when_unconstrained(self):
        shares = balance_machines(60_000.0, MACHINES)
        assert shares == {"M1": 30_000.0, "M2": 30_000.0}

    def test_ceiling_pins_small_machine(self):
        shares = balance_machines(90_000.0, MACHINES)
        assert shares["M2"] == 40_000.0
        assert shares["M1"] == pytest.approx(50_000.0)

    def test_floor_pins_and_sum_exact(self):
        machines = (Machine("A", 5_000.0, 60_000.0, 1.5, 0.8, 0.34),
                    Machine("B", 20_000.0, 60_000.0, 1.5, 0.8, 0.34))
        shares = balance_machines(30_000.0, machines)
        assert shares["B"] == 20_000.0
        assert sum(shares.values()) == 30_000.0

    @given(st.floats(min_value=20_000.0, max_value=100_000.0))
    @settings(max_examples=60, deadline=None)
    def test_shares_sum_exactly_and_respect_bounds(self, total):
        shares = balance_machines(total, MACHINES)
        assert sum(shares.values()) == total
        for m in MACHINES:
            assert m.f_min - 1e-6 <= shares[m.id] <= m.f_max + 1e-6

    def test_below_floor_suggests_bypass(self):
        with pytest.raises(InfeasibleLoadError) as exc:
            balance_machines(5_000.0, MACHINES)
        assert "bypass" in str(exc.value)
        assert exc.value.nearest_feasible == 20_000.0

    def test_above_ceiling_reports_nearest(self):
        with pytest.raises(InfeasibleLoadError) as exc:
            balance_machines(150_000.0, MACHINES)
        assert exc.value.nearest_feasible == 100_000.0

    def test_no_machines(self):
        with pytest.raises(InfeasibleLoadError):
            balance_machines(10_000.0, ())


class TestMileage:
    def test_small_spread_is_quiet(self):
        ledger = MachineLedger("C1", {"M1": 1000.0, "M2": 1005.0})
        assert mileage_suggestion(ledger) is None

    def test_large_spread_suggests_alternation(self):
        ledger = MachineLedger("C1", {"M1": 1000.0, "M2": 1400.0})
        s = mileage_suggestion(ledger)
        assert (s.activate, s.rest) == ("M1", "M2")
        assert s.spread == pytest.approx(400.0 / 1200.0)

    def test_single_machine_and_zero_hours(self):
        assert mileage_suggestion(MachineLedger("C1", {"M1": 9.0})) is None
        assert mileage_suggestion(
            MachineLedger("C1", {"M1": 0.0, "M2": 0.0})) is None

    def test_monotone_in_spread(self):
        triggered = False
        for extra in (0.0, 50.0, 101.0, 300.0, 900.0):
            ledger = MachineLedger("C1", {"M1": 1000.0, "M2": 1000.0 + extra})
            s = mileage_suggestion(ledger)
            if triggered:
                assert s is not None
            if s is not None:
                triggered = True
        assert triggered

    def test_accumulate_and_validation(self):
        ledger = MachineLedger("C1", {"M1": 10.0})
        ledger.accumulate("M1", 2.5)
        ledger.accumulate("M2", 1.0)
        assert ledger.hours == {"M1": 12.5, "M2": 1.0}
        with pytest.raises(ValueError):
            ledger.accumulate("M1", -1.0)
        with pytest.raises(ValueError):
            MachineLedger("C1", {"M1": -1.0})
        with pytest.raises(ValueError):
            MachineLedger("C1", {"M1": 1.0}, threshold=1.5)


class TestRegulator:
    CFG = RegulationConfig(r1_dp_target=5.0e4, cadence=10.0)

    @staticmethod
    def _measurements(model):
        return {st_.id: {"discharge_p": 4.5e6, "flow": 100_000.0}
                for st_ in model.stations()}

    def test_cadence_enforced(self, model):
        reg = Regulator(self.CFG, model)
        meas = self._measurements(model)
        assert reg.tick(0.0, None, 5.0e4, meas)
        assert reg.tick(5.0, None, 5.0e4, meas) is None
        assert reg.tick(10.0, None, 5.0e4, meas)

    def test_emits_per_machine_setpoints(self, model):
        reg = Regulator(self.CFG, model)
        records = reg.tick(0.0, None, 5.0e4, self._measurements(model))
        n_machines = sum(len(s.machines) for s in model.stations())
        assert len(records) == 2 * n_machines
        variables = {r.variable for r in records}
        assert variables == {"discharge_pressure", "flow"}
        flows = {r.machine: r.value for r in records if r.variable == "flow"
                 and r.station == "C1"}
        assert sum(flows.values()) == pytest.approx(100_000.0)

    def test_discharge_moves_are_slew_limited(self, model):
        reg = Regulator(self.CFG, model)
        meas = self._measurements(model)
        reg.tick(0.0, None, 5.0e4, meas)
        # huge dp error demands a large correction; the setpoint still moves
        # at most slew_limit * dt from the previous value
        before = dict(reg.last_setpoints)
        reg.tick(10.0, None, 9.0e5, meas)
        for sid, p in reg.last_setpoints.items():
            assert abs(p - before[sid]) <= self.CFG.slew_limit * 10.0 + 1e-9

    def test_stale_plan_flagged_and_ignored(self, model):
        import types
        reg = Regulator(self.CFG, model)
        meas = self._measurements(model)
        old_plan = types.SimpleNamespace(created_at=-1e5, trajectory=None)
        records = reg.tick(0.0, old_plan, 5.0e4, meas)
        assert any(r.variable == "stale_plan" for r in records)
