import io
import json

import numpy as np
import pytest

from orthotripod import Circle, Ellipse, FourierOval, ParabolaArc, SampledCurve
from orthotripod.cli import run
from orthotripod.config import fmt, parse_config, parse_curve, probes_csv, read_probes
from orthotripod.errors import ConfigError


def call(*argv):
    out = io.StringIO()
    code = run(list(argv), out)
    return code, out.getvalue()


def test_inline_specs():
    assert parse_curve("ellipse:2,1") == Ellipse(2, 1)
    assert parse_curve("circle:3") == Circle(3)
    assert parse_curve("parabola:2,-1,1") == ParabolaArc(2, (-1, 1))
    assert parse_curve("fourier:1,0,0.1;0,0,0.02") == FourierOval((1, 0, 0.1), (0, 0, 0.02))


@pytest.mark.parametrize("spec", ["ellipse:2", "ellipse:a,b", "torus:1", "circle:-1", "parabola:1,2,1"])
def test_bad_inline_specs(spec):
    with pytest.raises(ConfigError):
        parse_curve(spec)


def test_config_file(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("# an oval\nkind = fourier\ncos = 1, 0, 0.1\nsin = 0, 0, 0.05\nderivative = fd\n")
    c = parse_curve(str(cfg))
    assert c == FourierOval((1, 0, 0.1), (0, 0, 0.05), derivative_mode="fd")


def test_config_sampled(tmp_path):
    th = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    np.savetxt(tmp_path / "pts.csv", np.column_stack([np.cos(th), np.sin(th)]), delimiter=",")
    (tmp_path / "c.cfg").write_text("kind = sampled\npoints_file = pts.csv\n")
    c = parse_curve(str(tmp_path / "c.cfg"))
    assert isinstance(c, SampledCurve) and len(c.points) == 64


@pytest.mark.parametrize("text", ["kind = ellipse\nr = 2\n", "kind = circle\nr = 1\nr = 2\n",
                                  "kind = ellipse\na 2\n", "kind = ellipse\nh = 0.5\n", "a = 1\n"])
def test_config_rejected(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_probe_csv_roundtrip():
    text = probes_csv([(np.array([0.5, 1 / 3]), 4, 1), (np.array([-1.0, 0.0]), 2, 0)])
    assert text.splitlines() == ["qx,qy,n,index", "-1,0,2,0", "0.5,0.333333333333,4,1"]
    assert np.allclose(read_probes(text), [[-1, 0], [0.5, 1 / 3]], atol=1e-12)
    assert fmt(-0.0) == "0"


def test_charges_command():
    code, out = call("charges", "--curve", "ellipse:2,1", "--at", "0.1,0.05")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "t1,t2,t3,cx,cy,q1,q2,q3,signs,ceva_residual,force_residual"
    assert len(lines) == 5
    assert sum(l.split(",")[8] == "+++" for l in lines[1:]) == 2


def test_charges_params_and_law():
    code, out = call("charges", "--curve", "circle:1", "--params", "0,2.0943951023931953,4.1887902047863905",
                     "--law", "hooke", "--format", "json")
    assert code == 0
    (rec,) = json.loads(out)
    assert rec["signs"] == "+++"
    assert rec["q1"] == rec["q2"] == rec["q3"] == 1
    code, _ = call("charges", "--curve", "ellipse:2,1", "--params", "0.3,2,4.1")
    assert code == 1


def test_normals_command():
    code, out = call("normals", "--curve", "ellipse:2,1", "--at", "5,0")
    assert code == 0
    assert out.splitlines() == ["qx,qy,n,index", "5,0,2,0"]
    code, out = call("normals", "--at", "0,0", "--format", "json")
    (rec,) = json.loads(out)
    assert rec["n"] == 4 and rec["index"] == 1 and len(rec["feet"]) == 4


def test_normals_batch(tmp_path):
    (tmp_path / "p.csv").write_text("qx,qy\n5,0\n0.1,0.05\n")
    code, out = call("normals", "--probes", str(tmp_path / "p.csv"))
    assert code == 0
    assert out.splitlines()[1:] == ["0.1,0.05,4,1", "5,0,2,0"]


def test_doubles_and_caustic(tmp_path):
    code, out = call("doubles")
    assert code == 0 and len(out.splitlines()) == 3
    code, out = call("caustic", "--svg", str(tmp_path / "c.svg"), "--csv-out", str(tmp_path / "c.csv"),
                     "--shade-grid", "20")
    assert code == 0
    assert out.splitlines()[0] == "t,cx,cy" and len(out.splitlines()) == 5
    svg = (tmp_path / "c.svg").read_text()
    assert 'stroke="red"' in svg and "stroke-dasharray" in svg and "<circle" in svg
    assert (tmp_path / "c.csv").read_text().startswith("t,cx,cy\n0,1.5,0\n")


def test_atlas_command(tmp_path):
    code, out = call("atlas", "--resolution", "32", "--csv-out", str(tmp_path / "a"), "--svg", str(tmp_path / "a.svg"))
    assert code == 0
    assert out.splitlines() == ["components=1 chi=0 boundary=2", "positive components=1 chi=0 boundary=2"]
    assert (tmp_path / "a_vertices.csv").exists() and (tmp_path / "a_edges.csv").exists()
    assert (tmp_path / "a.svg").read_text().startswith("<svg")


def test_exit_codes():
    assert call("charges", "--curve", "nope:1", "--at", "0,0")[0] == 2
    assert call("charges", "--at", "0,0,0")[0] == 2
    assert call("atlas", "--resolution", "8")[0] == 2
    assert call("frobnicate")[0] == 2
    assert call("charges", "--at", "5,0")[0] == 1
    assert call("atlas", "--curve", "circle:1", "--resolution", "32")[0] == 1


def test_check_command():
    code, out = call("check", "--trials", "8", "--seed", "3")
    assert code == 0
    assert all(l.startswith("PASS") for l in out.splitlines())


def test_deterministic_output():
    a = call("charges", "--at", "0.3,-0.2", "--format", "json")[1]
    b = call("charges", "--at", "0.3,-0.2", "--format", "json")[1]
    assert a == b
