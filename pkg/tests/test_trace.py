import csv
import io

import numpy as np

from rdlab import Grid, Problem, StepperConfig, builtin, simulate
from rdlab.trace import Trace


def test_system_trace_columns_and_csv():
    grid = Grid.interval(1.0, 17)
    prob = Problem(grid, builtin("frank_kamenetskii"), grid.constant(1.0), 0.2,
                   a=1.0, b=1.0, v0=grid.constant(0.1))
    res = simulate(prob, StepperConfig(stride=3))
    text = res.trace.to_csv(header_comment="schema_version=1 config_hash=abc")
    lines = text.splitlines()
    assert lines[0] == "# schema_version=1 config_hash=abc"
    assert lines[1] == ("t,dt,l1_u,linf_u,min_u,mass_u,l1_v,linf_v,min_v,mass_v,"
                        "f_min,f_max,f_sign,g_min,g_max,g_sign")
    rows = list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))
    assert len(rows) == len(res.trace) == res.steps + 1
    assert float(rows[-1]["t"]) == 0.2
    assert rows[0]["f_sign"] == "all-negative" and rows[0]["g_sign"] == "all-positive"
    # floats are written with repr, so they round-trip exactly
    assert float(rows[5]["mass_u"]) == res.trace["mass_u"][5]


def test_record_stride_keeps_first_and_last():
    grid = Grid.interval(1.0, 9)
    prob = Problem(grid, builtin("power", p=1), grid.constant(1.0), 0.5)
    res = simulate(prob, StepperConfig(stride=4))
    rec = res.record
    assert rec.times[0] == 0.0 and rec.times[-1] == res.t_end
    assert rec.component(0).shape == (len(rec), 9)
    assert len(rec) <= res.steps // 4 + 2


def test_trace_records_lp_norms_and_witness():
    grid = Grid.interval(1.0, 9)
    prob = Problem(grid, builtin("power", p=2), grid.from_function(lambda x: 1 + x), 0.1)
    tr = Trace(grid, prob.reaction, 0.1, p_list=(2.0, 4.0))
    tr.record(0.0, 0.0, (prob.u0.values,))
    assert set(tr.lp) == {("u", 2.0), ("u", 4.0)}
    w = tr.witness(0)
    assert w["x"] == [0.0] and w["u"] == 1.0 and w["f"] == 1.0
    assert np.isclose(tr["l1_u"][0], 1.5)
