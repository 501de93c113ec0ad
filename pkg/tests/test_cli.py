import argparse
import json
import shutil
import subprocess
import sys

import pytest

from svgnum.cli import PipelineConfig, UsageError, build_parser, main, read_config_file, resolve_config
from svgnum.svg_core import document_numbers, parse_svg, serialize_svg
from svgnum.svgfloat import FloatKind, quantize

from conftest import CORPUS_DIR, FIXTURES, GOLDEN_DIR, corpus_files, svg_doc


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, [json.loads(line) for line in out.splitlines() if line.strip()]


@pytest.fixture
def small_dir(tmp_path):
    src = tmp_path / "in"
    src.mkdir()
    for f in corpus_files()[:3]:
        shutil.copy(f, src / f.name)
    return src


# ---------------------------------------------------------------- exit codes


def test_no_subcommand_is_usage_error(capsys):
    assert main([]) == 2


def test_unknown_flag_is_usage_error(capsys):
    assert main(["stats", "--bogus"]) == 2


def test_unknown_extension_is_usage_error(tmp_path, capsys):
    f = tmp_path / "x.txt"
    f.write_text("hi")
    assert main(["convert", str(f)]) == 2
    assert main(["convert", str(tmp_path / "missing.svg")]) == 2


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0


def test_entry_point_script():
    exe = shutil.which("svgnum")
    argv = [exe] if exe else [sys.executable, "-m", "svgnum.cli"]
    proc = subprocess.run(argv + ["stats", "--path", "M 123.456 234.567"], capture_output=True, text=True)
    assert proc.returncode == 0
    rec = json.loads(proc.stdout)
    assert rec["totals"] == {"DigitLevel": 16, "NumberAware": 8, "Placeholder": 3}


# ---------------------------------------------------------------- convert


def test_convert_golden_round_trip(tmp_path, capsys):
    src = tmp_path / "example.svg"
    shutil.copy(GOLDEN_DIR / "example.svg", src)
    code, recs = run(["convert", src, "--kind", "F32", "--out", tmp_path / "bin"], capsys)
    assert code == 0 and recs[0]["ok"] and recs[0]["kind"] == "F32"
    blob = tmp_path / "bin" / "example.svgf"
    assert blob.read_bytes() == (GOLDEN_DIR / "example.f32.svgf").read_bytes()
    code, recs = run(["convert", blob, "--out", tmp_path / "back"], capsys)
    assert code == 0 and recs[0]["direction"] == "svgf->svg"
    back = parse_svg((tmp_path / "back" / "example.svg").read_text())
    orig = parse_svg(src.read_text())
    assert document_numbers(back) == pytest.approx(list(quantize(document_numbers(orig), FloatKind.F32)), abs=1e-3)


def test_convert_directory_one_record_per_file(small_dir, tmp_path, capsys):
    (small_dir / "notes.txt").write_text("ignored")
    code, recs = run(["convert", small_dir, "--out", tmp_path / "o"], capsys)
    assert code == 0 and len(recs) == 3
    assert all(r["ok"] and r["ratio"] > 1 for r in recs)
    assert len(list((tmp_path / "o").glob("*.svgf"))) == 3


def test_convert_stops_on_first_failure_unless_asked(small_dir, capsys):
    (small_dir / "aaa_bad.svg").write_text("<svg")
    code, recs = run(["convert", small_dir], capsys)
    assert code == 1 and len(recs) == 1 and recs[0]["error"] == "MalformedDocument"
    code, recs = run(["convert", small_dir, "--continue-on-error"], capsys)
    assert code == 1 and len(recs) == 4 and sum(r["ok"] for r in recs) == 3


def test_convert_mixed_directions_is_usage_error(tmp_path, capsys):
    a, b = tmp_path / "a.svg", tmp_path / "b.svgf"
    shutil.copy(GOLDEN_DIR / "example.svg", a)
    shutil.copy(GOLDEN_DIR / "example.f16.svgf", b)
    assert main(["convert", str(a), str(b)]) == 2


def test_convert_corrupt_svgf_is_data_failure(tmp_path, capsys):
    bad = tmp_path / "bad.svgf"
    bad.write_bytes(b"SVGX\x01\x01")
    code, recs = run(["convert", bad], capsys)
    assert code == 1 and recs[0]["error"] == "BadMagic"


# ---------------------------------------------------------------- normalize


def test_normalize_flags_out_of_bounds(small_dir, tmp_path, capsys):
    oob = sorted((FIXTURES / "out_of_bounds").glob("*.svg"))[0]
    shutil.copy(oob, small_dir / oob.name)
    code, recs = run(["normalize", small_dir, "--out", tmp_path / "ok"], capsys)
    assert code == 0
    per_file = {r["file"].split("/")[-1]: r for r in recs if not r.get("summary")}
    assert per_file[oob.name]["reason"] == "OutOfBounds" and not per_file[oob.name]["accepted"]
    others = [r for name, r in per_file.items() if name != oob.name]
    assert all(r["accepted"] and r["reason"] == "Ok" for r in others)
    summary = recs[-1]
    assert summary["summary"] and summary["accepted"] == 3 and summary["accepted_fraction"] == 0.75
    assert summary["mean_ssim"] >= 0.99
    assert len(list((tmp_path / "ok").glob("*.svg"))) == 3
    assert main(["normalize", str(small_dir), "--strict"]) == 1


def test_normalize_empty_corpus(tmp_path, capsys):
    code, recs = run(["normalize", tmp_path], capsys)
    assert code == 0
    assert recs == [{"command": "normalize", "summary": True, "files": 0, "accepted": 0,
                     "accepted_fraction": None, "mean_ssim": None, "reasons": {}}]


# ---------------------------------------------------------------- decompose / consolidate


def test_decompose_table_path(capsys):
    code, recs = run(["decompose", "--path", "M 123.456 234.567"], capsys)
    assert code == 0 and recs[0]["tokens"] == ["M", "[NUM]", "[NUM]"]


def test_decompose_consolidate_round_trip(small_dir, tmp_path, capsys):
    report = tmp_path / "seq.jsonl"
    assert main(["decompose", str(small_dir), "--report", str(report)]) == 0
    code, recs = run(["consolidate", report, "--out", tmp_path / "rebuilt"], capsys)
    assert code == 0 and len(recs) == 3
    for f in sorted(small_dir.glob("*.svg")):
        original = serialize_svg(parse_svg(f.read_text()), 3)
        rebuilt = (tmp_path / "rebuilt" / f.name).read_text()
        assert parse_svg(rebuilt) == parse_svg(original)


def test_tampered_line_reports_count_mismatch(tmp_path, capsys):
    report = tmp_path / "seq.jsonl"
    main(["decompose", "--path", "M 1 2 L 3 4", "--path", "M 5 6", "--report", str(report)])
    lines = report.read_text().splitlines()
    first = json.loads(lines[0])
    first["floats"] = first["floats"][:-1]
    report.write_text(json.dumps(first) + "\n" + lines[1] + "\n")
    code, recs = run(["consolidate", report], capsys)
    assert code == 1
    assert recs[0]["ok"] is False and recs[0]["error"] == "CountMismatch"
    assert recs[1]["ok"] and recs[1]["text"] == "M 5 6"


def test_consolidate_missing_file_is_usage_error(tmp_path, capsys):
    assert main(["consolidate", str(tmp_path / "nope.jsonl")]) == 2


# ---------------------------------------------------------------- stats / verify / bench


def test_stats_on_files_and_paths(small_dir, capsys):
    code, recs = run(["stats", small_dir, "--path", "M 123.456 234.567"], capsys)
    t = recs[0]["totals"]
    assert code == 0 and recs[0]["files"] == 4
    assert t["Placeholder"] <= t["NumberAware"] <= t["DigitLevel"]
    assert recs[0]["ratios"]["DigitLevel/Placeholder"] == pytest.approx(t["DigitLevel"] / t["Placeholder"])


def test_stats_empty_corpus_is_usage_error(tmp_path, capsys):
    assert main(["stats", str(tmp_path)]) == 2


def test_verify_json(capsys):
    code, recs = run(["verify", "--json"], capsys)
    assert code == 0
    assert [r["check"] for r in recs] == ["table_counts", "nan_box", "svgfloat_roundtrip", "ssim_identity", "grad_check"]
    assert all(r["ok"] for r in recs)


def test_verify_reports_failing_checkpoint(tmp_path, capsys):
    from svgnum.number_codec import init_codec, save_checkpoint

    p = init_codec(k=2, d=4, seed=0)
    p.decoder.weights[0][0, 0] = float("nan")
    save_checkpoint(p, tmp_path / "bad")
    code, recs = run(["verify", "--json", "--checkpoint", tmp_path / "bad"], capsys)
    assert code == 1 and recs[-1]["check"] == "grad_check" and not recs[-1]["ok"]


def test_bench_records(small_dir, capsys):
    code, recs = run(["bench", small_dir, "--repeat", "1", "--render-size", "32"], capsys)
    assert code == 0 and len(recs) == 4 and recs[-1]["summary"]
    assert all(r["encode_s"] >= 0 for r in recs[:-1])


# ---------------------------------------------------------------- reward


def test_reward_group_of_eight(tmp_path, capsys):
    files = corpus_files()
    gt = files[0]
    cands = files[:8]
    code, recs = run(["reward", gt, *cands, "--render-size", "64"], capsys)
    assert code == 0 and len(recs) == 8
    assert recs[0]["scores"]["ssim"] == pytest.approx(1.0, abs=1e-9)
    assert abs(sum(r["advantage"] for r in recs)) <= 1e-12
    assert recs[0]["weights"] == {"dinov2_sim": 0.0, "ssim": 1.0, "lpips_prime": 0.0}


def test_reward_with_default_weights_needs_providers(capsys):
    f = corpus_files()[0]
    assert main(["reward", str(f), str(f), "--weights", "0.4", "0.3", "0.3"]) == 2


def test_reward_with_command_providers(tmp_path, capsys):
    script = tmp_path / "const.py"
    script.write_text("print(0.5)\n")
    f = corpus_files()[0]
    prov = f"{sys.executable} {script} {{gt}} {{pred}}"
    code, recs = run(["reward", f, f, f, "--weights", "0.4", "0.3", "0.3", "--render-size", "32",
                      "--provider", f"dinov2_sim={prov}", "--provider", f"lpips_prime={prov}"], capsys)
    assert code == 0
    assert recs[0]["reward"] == pytest.approx(0.4 * 0.5 + 0.3 * 1.0 + 0.3 * 0.5, abs=1e-12)
    assert recs[0]["advantage"] == 0.0


def test_reward_single_candidate_omits_advantage(capsys):
    f = corpus_files()[0]
    code, recs = run(["reward", f, f, "--render-size", "32"], capsys)
    assert code == 0 and recs[0]["advantage"] is None


# ---------------------------------------------------------------- config


def parse(argv):
    return build_parser().parse_args(argv)


def test_defaults():
    cfg = resolve_config(parse(["stats"]), environ={})
    assert (cfg.M, cfg.precision, cfg.float_kind, cfg.ssim_threshold) == (512, 3, "F16", 0.99)
    assert (cfg.fourier_k, cfg.d, cfg.lam, cfg.noise_sigma, cfg.render_size) == (16, 64, 1e-5, 0.2, 256)
    assert (cfg.weight_dinov2, cfg.weight_ssim, cfg.weight_lpips) == (0.4, 0.3, 0.3)


def test_precedence_flags_over_file_over_defaults(tmp_path):
    conf = tmp_path / "run.conf"
    conf.write_text("# desk run\nM = 256\nprecision = 2\nseed = 5\nlambda = 1e-4\n\n"
                    "provider.dinov2_sim = scorer {gt} {pred}\n")
    cfg = resolve_config(parse(["stats", "--config", str(conf), "--precision", "4"]), environ={})
    assert cfg.M == 256 and cfg.precision == 4 and cfg.seed == 5 and cfg.lam == 1e-4
    assert cfg.providers == {"dinov2_sim": "scorer {gt} {pred}"}


def test_seed_env_sits_between_flag_and_file(tmp_path):
    conf = tmp_path / "run.conf"
    conf.write_text("seed = 5\n")
    args = parse(["verify", "--config", str(conf)])
    assert resolve_config(args, environ={"SVGF_SEED": "9"}).seed == 9
    args = parse(["verify", "--config", str(conf), "--seed", "3"])
    assert resolve_config(args, environ={"SVGF_SEED": "9"}).seed == 3
    with pytest.raises(UsageError):
        resolve_config(parse(["verify"]), environ={"SVGF_SEED": "x"})


def test_bad_config_files(tmp_path):
    for text in ["nonsense\n", "colour = red\n", "M = big\n"]:
        conf = tmp_path / "bad.conf"
        conf.write_text(text)
        with pytest.raises(UsageError):
            read_config_file(conf)
    with pytest.raises(UsageError):
        read_config_file(tmp_path / "missing.conf")


def test_invalid_values_are_usage_errors(capsys):
    assert main(["stats", "--path", "M 0 0", "--M", "-1"]) == 2
    assert main(["convert", "x.svg", "--kind", "F64"]) == 2
    with pytest.raises(UsageError):
        PipelineConfig(float_kind="F8").validate()


def test_seed_env_reaches_subprocess(tmp_path):
    # verify uses the seed for its gradient-check inputs; a bad value must exit 2
    env = {"SVGF_SEED": "not-a-number", "PATH": ""}
    proc = subprocess.run([sys.executable, "-m", "svgnum.cli", "verify"], capture_output=True, text=True,
                          env={**__import__("os").environ, **env})
    assert proc.returncode == 2 and "SVGF_SEED" in proc.stderr
