"""Smoke test for the vcsim Python module.

Build and install first, e.g.  maturin develop -m crates/py/Cargo.toml
"""

import math

import vcsim


def main():
    cfg = vcsim.SimConfig(duration_s=10, n_users=4, seed=3)
    assert cfg.n_users == 4 and cfg.strategy == "vccfirst"
    cfg.retry_to_cloud = True
    assert cfg.retry_to_cloud is True
    assert vcsim.SimConfig.from_kv(cfg.to_kv()) == cfg
    assert len(vcsim.SimConfig.keys()) == 27
    try:
        cfg.n_users = 0
        cfg.validate()
        raise AssertionError("n_users = 0 accepted")
    except ValueError:
        cfg.n_users = 4

    run = vcsim.run_scenario(cfg, records=True)
    s = run["summary"]
    assert run["config"]["seed"] == 3
    assert s["issued"] == 4 * 50
    assert s["issued"] == s["completed"] + s["failed"] + s["in_flight"]
    assert len(run["records"]) == s["completed"] + s["failed"]
    assert run == vcsim.run_scenario(cfg, records=True), "same seed, same result"

    rows = vcsim.sweep("users", [1, 2], config=cfg, repeats=2)
    assert len(rows) == 2 * 2 * 2
    assert {r["strategy"] for r in rows} == {"ecfirst", "vccfirst"}

    report = vcsim.cost_report()
    assert report["breakeven_requests"] == 50_000_000
    assert vcsim.breakeven_requests(2e-5, 1000.0) == 50_000_000
    assert math.isclose(vcsim.vcc_spend(2e-5, 40.0, report["breakeven_s"]), 1000.0, rel_tol=1e-9)

    assert math.isclose(vcsim.wireless_path_time(4000, 6e6, 0.0), 32000 / 6e6)
    assert vcsim.in_coverage(200.0, 100.0)
    assert not vcsim.in_coverage(200.1, 100.0)
    assert vcsim.latency_threshold("LL+") == 0.1
    assert vcsim.meets_latency_class("LL++", 0.016)

    trace = vcsim.mobility_trace(vcsim.SimConfig(n_vehicles=2, duration_s=3), dt=1.0)
    assert len(trace) == 2 * 4
    print(f"ok: mean total {s['mean_total_s'] * 1e3:.2f} ms over {s['completed']} tasks")


if __name__ == "__main__":
    main()
