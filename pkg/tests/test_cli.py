import io

import pytest

from ecsbell.cli import build_problem, main, parse_config, read_config_file
from ecsbell.errors import UsageError


def _run(argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(argv, out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def test_parse_figure():
    cfg = parse_config(["figure", "--id", "fig6b", "--out", "fig6b.csv"], environ={})
    assert (cfg.command, cfg.id, cfg.out, cfg.workers) == ("figure", "fig6b", "fig6b.csv", 1)


def test_figure_needs_id():
    with pytest.raises(UsageError):
        parse_config(["figure"], environ={})


def test_spot_check_problem():
    cfg = parse_config(
        "optimize --kind onoff --parity odd --eta1 0.75 --eta2 1.0 --amplitudes asymmetric".split(),
        environ={},
    )
    prob = build_problem(cfg)
    assert prob.amplitudes == "asymmetric_free"
    assert (prob.channel.eta1, prob.channel.eta2) == (0.75, 1.0)


@pytest.mark.parametrize(
    "flags,mode",
    [
        (["--amplitudes", "symmetric"], "symmetric_free"),
        (["--amplitudes", "symmetric", "--nbar", "2"], "fixed_nbar_symmetric"),
        (["--nbar", "2.24"], "fixed_nbar"),
        (["--alpha1", "2"], "pinned_alpha1"),
        (["--amplitudes", "fixed", "--alpha1", "1", "--alpha2", "0.5"], "fixed"),
    ],
)
def test_amplitude_modes(flags, mode):
    assert build_problem(parse_config(["optimize"] + flags, environ={})).amplitudes == mode


def test_strategy_channel_flags():
    prob = build_problem(parse_config("optimize --strategy b --r 0.2".split(), environ={}))
    assert (prob.channel.eta1, prob.channel.eta2) == pytest.approx((1.0, 0.64))
    with pytest.raises(UsageError):
        parse_config("optimize --strategy A".split(), environ={})
    with pytest.raises(UsageError):
        parse_config("optimize --strategy A --r 0.1 --eta1 0.9".split(), environ={})


def test_config_file_and_flag_precedence(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# comment\nkind = parity\nparity = even   # trailing\nstarts = 12\n\nworkers = 3\n")
    cfg = parse_config(["optimize", "--config", str(path), "--starts", "5"], environ={})
    assert (cfg.kind, cfg.parity, cfg.starts, cfg.workers) == ("parity", "even", 5, 3)


def test_config_file_errors(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("starts = 0\n")
    with pytest.raises(UsageError):
        parse_config(["optimize", "--config", str(path)], environ={})
    path.write_text("colour = blue\n")
    with pytest.raises(UsageError, match="colour"):
        read_config_file(path)
    path.write_text("just words\n")
    with pytest.raises(UsageError):
        read_config_file(path)


def test_workers_from_environment():
    assert parse_config(["validate"], environ={"ECS_BELL_WORKERS": "4"}).workers == 4
    assert parse_config(["validate", "--workers", "2"], environ={"ECS_BELL_WORKERS": "4"}).workers == 2
    with pytest.raises(UsageError):
        parse_config(["validate"], environ={"ECS_BELL_WORKERS": "0"})


def test_bad_choices_are_usage_errors():
    for argv in (["optimize", "--kind", "homodyne"], ["launch"], ["optimize", "--eta1", "x"]):
        with pytest.raises(UsageError):
            parse_config(argv, environ={})


def test_unknown_figure_exits_2():
    code, _, err = _run(["figure", "--id", "nosuch"])
    assert code == 2 and "nosuch" in err


def test_out_of_range_parameter_exits_2():
    code, _, err = _run(["optimize", "--eta1", "1.5"])
    assert code == 2 and err


def test_optimize_prints_block_and_writes_csv(tmp_path):
    out = tmp_path / "opt.csv"
    code, text, _ = _run(
        ["optimize", "--kind", "parity", "--parity", "even", "--amplitudes", "fixed",
         "--alpha1", "0.8", "--alpha2", "0.8", "--starts", "4", "--out", str(out)]
    )
    assert code == 0
    assert text.startswith("bell_max")
    header, row = out.read_text().splitlines()
    assert header == "bell_max,alpha1,alpha2,xi1_re,xi1_im,xi1p_re,xi1p_im,xi2_re,xi2_im,xi2p_re,xi2p_im"
    assert row.split(",")[1:3] == ["0.8", "0.8"]


def test_sweep_is_deterministic(tmp_path):
    argv = ["sweep", "--kind", "onoff", "--parity", "odd", "--over", "nbar", "--grid", "1.5,2.5,2",
            "--starts", "4"]
    assert _run(argv + ["--out", str(tmp_path / "a.csv")])[0] == 0
    assert _run(argv + ["--out", str(tmp_path / "b.csv")])[0] == 0
    a = (tmp_path / "a.csv").read_bytes()
    assert a == (tmp_path / "b.csv").read_bytes()
    assert a.startswith(b"nbar,bell_max,")


def test_sweep_needs_grid():
    assert _run(["sweep", "--over", "r"])[0] == 2
    assert _run(["sweep", "--over", "r", "--grid", "0,1"])[0] == 2


def test_sweep_over_r_needs_strategy():
    assert _run(["sweep", "--over", "r", "--grid", "0,0.2,2"])[0] == 2
