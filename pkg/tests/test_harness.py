import json
from dataclasses import replace

import pytest

from satchain.cli import main
from satchain.energy import Mode
from satchain.harness import (
    OnlineSimulation,
    SimulationConfig,
    SlotMetrics,
    derive_seed,
    emit,
    emit_text,
    parse_metrics_json,
    run_batch,
    run_online,
    run_taguchi,
)

from conftest import make_graph, make_request


class TestRunBatch:
    def test_no_requests(self):
        config = SimulationConfig(requests=0)
        metrics = run_batch(config, "pgra", seed=1)
        assert metrics.phi == 0.0
        assert metrics.allocated_fraction == 1.0
        assert metrics.iterations == 1

    def test_small_load_allocates_everyone(self):
        config = SimulationConfig(requests=5)
        metrics = run_batch(config, "pgra", seed=3)
        assert metrics.allocated_fraction == 1.0

    def test_identical_runs_identical_metrics(self):
        config = SimulationConfig(requests=8)
        assert run_batch(config, "pgra", seed=11) == run_batch(config, "pgra", seed=11)

    def test_baselines_run_single_pass(self):
        config = SimulationConfig(requests=6)
        for algorithm in ("viterbi", "greedy"):
            metrics = run_batch(config, algorithm, seed=2)
            assert metrics.iterations == 1
            assert 0.0 <= metrics.allocated_fraction <= 1.0

    def test_unknown_algorithm_rejected(self):
        with pytest.raises(ValueError):
            run_batch(SimulationConfig(requests=1), "annealing", seed=0)

    def test_validation_hook_runs_clean(self):
        config = SimulationConfig(requests=8, validate_each_step=True)
        run_batch(config, "pgra", seed=5)


class TestOnlineSimulation:
    def _tiny_config(self):
        return SimulationConfig(
            planes=1,
            sats_per_plane=2,
            cpu=20.0,
            memory=64.0,
            mode="online",
            num_paths=2,
            beam_width=4,
        )

    def test_resources_hold_for_the_lifetime_then_release(self):
        # request 0 fills the node for slots 4-5, so an arrival in slot 5 is
        # rejected and the same-sized arrival in slot 6 fits again
        config = self._tiny_config()
        graph = make_graph(1, [], capacity={"cpu": 20.0, "memory": 64.0})
        sim = OnlineSimulation(replace(config, planes=1, sats_per_plane=1), graph)
        for slot in (0, 1, 2, 3):
            sim.step(slot, [], "pgra", seed=0)
        assert sim.fleet.states[0].mode is Mode.OFF_UNAVAILABLE
        r1 = make_request(0, 0, 0, [(15.0, 8.0, 10.0)], max_delay=50.0, duration=2, arrival_slot=4)
        m4 = sim.step(4, [r1], "pgra", seed=0)
        assert m4.allocated_fraction == 1.0
        assert m4.mean_power == 0.0  # restart feeds straight into slot 5 service
        assert sim.running and sim.running[0].end_slot == 5
        r2 = make_request(1, 0, 0, [(15.0, 8.0, 10.0)], max_delay=50.0, duration=1, arrival_slot=5)
        m5 = sim.step(5, [r2], "pgra", seed=0)
        assert m5.allocated_fraction == 0.0
        r3 = make_request(2, 0, 0, [(15.0, 8.0, 10.0)], max_delay=50.0, duration=1, arrival_slot=6)
        m6 = sim.step(6, [r3], "pgra", seed=0)
        assert m6.allocated_fraction == 1.0
        assert all(p.request.id != 0 for p in sim.running)

    def test_server_states_follow_occupancy(self):
        config = self._tiny_config()
        graph = make_graph(1, [], capacity={"cpu": 20.0, "memory": 64.0})
        sim = OnlineSimulation(replace(config, sats_per_plane=1), graph)
        request = make_request(0, 0, 0, [(8.0, 8.0, 10.0)], max_delay=50.0, duration=1, arrival_slot=0)
        sim.step(0, [request], "pgra", seed=0)
        assert sim.fleet.states[0].mode is Mode.ON
        for slot in (1, 2, 3):
            sim.step(slot, [], "pgra", seed=0)
            assert sim.fleet.states[0].mode is Mode.IDLE
        sim.step(4, [], "pgra", seed=0)
        assert sim.fleet.states[0].mode is Mode.OFF_UNAVAILABLE
        sim.step(5, [], "pgra", seed=0)
        assert sim.fleet.states[0].mode is Mode.OFF_AVAILABLE
        modes = [row[2] for row in sim.fleet.timeline]
        assert modes == ["on", "idle", "idle", "idle", "off_unavailable", "off_available"]

    def test_restart_recorded_as_setup(self):
        config = self._tiny_config()
        graph = make_graph(1, [], capacity={"cpu": 20.0, "memory": 64.0})
        sim = OnlineSimulation(replace(config, sats_per_plane=1), graph)
        for slot in range(5):
            sim.step(slot, [], "pgra", seed=0)
        assert sim.fleet.states[0].mode is Mode.OFF_AVAILABLE
        request = make_request(0, 0, 0, [(8.0, 8.0, 10.0)], max_delay=50.0, duration=2, arrival_slot=5)
        sim.step(5, [request], "pgra", seed=0)
        assert sim.fleet.timeline[-1][2] == "setup"
        assert sim.fleet.timeline[-1][3] == 415.0

    def test_single_slot_online_equals_batch(self):
        config = SimulationConfig(mode="online", slots=1, requests_per_slot=(6, 6), requests=6)
        online = run_online(config, "pgra", seed=9)[0]
        batch = run_batch(replace(config, mode="batch"), "pgra", seed=9)
        assert online.phi == batch.phi
        assert online.allocated_fraction == batch.allocated_fraction

    def test_full_run_shape_and_determinism(self):
        config = SimulationConfig(mode="online", slots=6, validate_each_step=True)
        a = run_online(config, "pgra", seed=4)
        b = run_online(config, "pgra", seed=4)
        assert a == b
        assert [m.slot for m in a] == list(range(6))
        for metrics in a:
            assert 0.0 <= metrics.allocated_fraction <= 1.0
            assert 0.0 <= metrics.phi <= 10.0  # at most requests_per_slot[1] payoffs of 1


class TestTaguchi:
    def test_single_cell_equals_run_batch(self):
        config = SimulationConfig()
        result = run_taguchi(config, d_levels=(2,), b_levels=(2,), m_values=(4,), repetitions=1, seed=5)
        direct = run_batch(replace(config, num_paths=2, beam_width=2, requests=4), "pgra", derive_seed(5, 4, 0))
        assert result.rows == [
            {"number": 0, "d": 2, "beam": 2, "requests": 4, "mean_phi": direct.phi}
        ]

    def test_table_and_effect_shapes(self):
        config = SimulationConfig()
        result = run_taguchi(
            config, d_levels=(1, 2), b_levels=(1, 2), m_values=(3, 5), repetitions=2, seed=1
        )
        assert len(result.rows) == 8
        assert set(result.effects) == {"d", "beam"}
        for factor in ("d", "beam"):
            assert set(result.effects[factor]) == {1, 2}
            for level in (1, 2):
                assert set(result.effects[factor][level]) == {3, 5}
        text = result.to_csv_text()
        assert text.splitlines()[0] == "number,d,beam,requests,mean_phi"
        parsed = json.loads(result.to_json_text())
        assert len(parsed["rows"]) == 8


class TestEmission:
    def _metrics(self):
        return [
            SlotMetrics(0, "pgra", 7, 3.25, 1.0, 0.01, 0.02, 0.9, 5),
            SlotMetrics(1, "pgra", 7, 2.5, 0.5, 0.015, 0.025, 0.95, 4),
        ]

    def test_csv_header_and_stability(self, tmp_path):
        out = tmp_path / "metrics.csv"
        emit(self._metrics(), "csv", str(out))
        text = out.read_text()
        assert text.splitlines()[0] == (
            "slot,algorithm,seed,phi,allocated_fraction,mean_bw,mean_power,mean_delay,iterations"
        )
        assert emit_text(self._metrics(), "csv") == text

    def test_json_round_trip(self):
        records = self._metrics()
        parsed = parse_metrics_json(emit_text(records, "json"))
        assert parsed == records

    def test_empty_results_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            emit([], "csv", str(tmp_path / "x.csv"))

    def test_zero_request_run_still_emits_one_row(self, tmp_path):
        metrics = run_batch(SimulationConfig(requests=0), "pgra", seed=0)
        out = tmp_path / "empty.csv"
        emit([metrics], "csv", str(out))
        assert len(out.read_text().splitlines()) == 2

    def test_bad_path_mentions_location(self):
        with pytest.raises(OSError, match="no/such/dir"):
            emit(self._metrics(), "csv", "no/such/dir/file.csv")


class TestConfig:
    def test_json_round_trip(self):
        config = SimulationConfig(requests=17, beam_width=None, idle_charge="per_vnf")
        clone = SimulationConfig.from_json(config.to_json())
        assert clone == config

    def test_with_nodes(self):
        for total in (6, 9, 12, 15):
            config = SimulationConfig().with_nodes(total)
            assert len(config.build_graph().nodes) == total

    def test_rejects_bad_mode(self):
        with pytest.raises(ValueError):
            SimulationConfig(mode="replay")


class TestCli:
    def test_batch_json_to_stdout(self, capsys):
        assert main(["batch", "--nodes", "6", "--requests", "3", "--seed", "1", "--format", "json"]) == 0
        rows = json.loads(capsys.readouterr().out)
        assert len(rows) == 1 and rows[0]["algorithm"] == "pgra"

    def test_batch_flag_overrides_and_output_file(self, tmp_path, capsys):
        cfg_path = tmp_path / "config.json"
        cfg_path.write_text(SimulationConfig(requests=2).to_json())
        out = tmp_path / "result.csv"
        code = main(
            [
                "batch",
                "--config",
                str(cfg_path),
                "--algorithm",
                "greedy",
                "--requests",
                "4",
                "--d",
                "2",
                "--beam",
                "1",
                "--out",
                str(out),
            ]
        )
        assert code == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 2
        assert ",greedy," in lines[1]

    def test_online_rows_per_slot(self, tmp_path):
        out = tmp_path / "online.csv"
        code = main(
            ["online", "--nodes", "6", "--slots", "3", "--seed", "2", "--out", str(out), "--format", "csv"]
        )
        assert code == 0
        assert len(out.read_text().splitlines()) == 4

    def test_check_runs_property_suites(self, capsys):
        assert main(["check", "--seed", "1"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 4
        assert all(line.startswith("PASS") for line in lines)

    def test_taguchi_smoke(self, capsys):
        code = main(
            [
                "taguchi",
                "--d-levels", "1,2",
                "--b-levels", "1",
                "--m-values", "3",
                "--repetitions", "1",
                "--seed", "3",
                "--format", "csv",
            ]
        )
        assert code == 0
        out = capsys.readouterr().out.splitlines()
        assert out[0] == "number,d,beam,requests,mean_phi"
        assert len(out) == 3
