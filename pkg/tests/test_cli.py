"""End-to-end tests of the command line."""

from __future__ import annotations

from dataclasses import replace
from typing import TYPE_CHECKING

import pytest
import yaml

from dmnet import cli
from dmnet.config import load_config
from dmnet.core import Variant
from dmnet.errors import EXIT_CONFIG, EXIT_DATA, EXIT_OK
from dmnet.simulation.corpus import load_manifest, write_manifest
from dmnet.simulation.verify import verify_corpus

if TYPE_CHECKING:
    from pathlib import Path

    from dmnet.simulation.verify import VerificationReport

TINY = """
stft: {n_fft: 64, hop: 16, win_length: 64}
simulate:
  ranges: {rt60_s: [0.3, 0.4]}
model: {channels: 8, n_conformers: 1, n_heads: 2, dense_depth: 1, ffn_multiplier: 2, conv_kernel: 3}
train: {batch_size: 2, segment_s: 0.25, checkpoint_every: 2, log_every: 1, validate_every: 0}
"""


@pytest.fixture
def config_file(tmp_path: Path) -> Path:
    path = tmp_path / "tiny.yaml"
    path.write_text(TINY)
    return path


def _simulate(config_file: Path, audio_dirs: tuple[Path, Path], out: Path, *extra: str) -> int:
    clean_dir, noise_dir = audio_dirs
    argv = ["--config", str(config_file), "simulate", "--clean", str(clean_dir), "--noise", str(noise_dir)]
    return cli.main([*argv, "--out", str(out), "--count", "4", "--seed", "7", *extra])


def test_simulate_is_reproducible(config_file: Path, audio_dirs: tuple[Path, Path], tmp_path: Path) -> None:
    """Test that two runs with the same seed produce byte-identical corpora."""
    assert _simulate(config_file, audio_dirs, tmp_path / "a") == EXIT_OK
    assert _simulate(config_file, audio_dirs, tmp_path / "b") == EXIT_OK
    a, b = tmp_path / "a", tmp_path / "b"
    assert (a / "manifest.jsonl").read_text() == (b / "manifest.jsonl").read_text()
    files = sorted(p.relative_to(a) for p in a.rglob("*.wav"))
    assert len(files) == 8
    for rel in files:
        assert (a / rel).read_bytes() == (b / rel).read_bytes()
    resolved = yaml.safe_load((a / "resolved_config.yaml").read_text())
    assert resolved["simulate"]["count"] == 4
    assert resolved["simulate"]["seed"] == 7


def test_simulate_with_verification(config_file: Path, audio_dirs: tuple[Path, Path], tmp_path: Path) -> None:
    out = tmp_path / "corpus"
    assert _simulate(config_file, audio_dirs, out, "--verify") == EXIT_OK
    assert len((out / "verification.jsonl").read_text().splitlines()) == 4


def test_verification_failure_exits_with_data_code(
    config_file: Path,
    audio_dirs: tuple[Path, Path],
    tmp_path: Path,
    monkeypatch: pytest.MonkeyPatch,
    capsys: pytest.CaptureFixture[str],
) -> None:
    """Test that a pair whose manifest overstates its SNR by 5 dB fails the run and is named."""

    def corrupted(manifest: Path, *, strict: bool = False) -> list[VerificationReport]:
        entries = load_manifest(manifest)
        spec = entries[1].spec
        assert spec.snr_db is not None
        entries[1] = replace(entries[1], spec=replace(spec, snr_db=spec.snr_db + 5.0))
        write_manifest(manifest, entries)
        return verify_corpus(manifest, strict=strict)

    monkeypatch.setattr(cli, "verify_corpus", corrupted)
    out = tmp_path / "corpus"
    assert _simulate(config_file, audio_dirs, out, "--verify") == EXIT_DATA
    victim = load_manifest(out / "manifest.jsonl")[1].id
    assert f"FAIL {victim}: snr" in capsys.readouterr().out


def test_train_restore_evaluate(
    config_file: Path,
    audio_dirs: tuple[Path, Path],
    tmp_path: Path,
    capsys: pytest.CaptureFixture[str],
) -> None:
    corpus = tmp_path / "corpus"
    assert _simulate(config_file, audio_dirs, corpus) == EXIT_OK
    manifest = corpus / "manifest.jsonl"

    workdir = tmp_path / "run"
    argv = ["--config", str(config_file), "train", "--manifest", str(manifest), "--out", str(workdir)]
    if all(e.split.value == "validation" for e in load_manifest(manifest)):
        pytest.skip("corpus drew only validation speakers")
    assert cli.main([*argv, "--steps", "0", "--variant", "dm2"]) == EXIT_OK
    checkpoint = workdir / "checkpoints" / "step_0000000.pt"
    assert checkpoint.is_file()
    assert "alpha 0.5000" in capsys.readouterr().out
    assert load_config(workdir / "resolved_config.yaml").model.variant is Variant.DM2
    command = yaml.safe_load((workdir / "resolved_config.yaml").read_text())["command"]
    assert command["command"] == "train"
    assert command["manifest"] == str(manifest)
    assert command["resume"] is None

    restored = tmp_path / "restored"
    restore_argv = ["restore", "--checkpoint", str(checkpoint), "--input", str(corpus / "degraded")]
    assert cli.main([*restore_argv, "--out", str(restored)]) == EXIT_OK
    assert sorted(p.name for p in restored.glob("*.wav")) == sorted(p.name for p in (corpus / "degraded").iterdir())
    restored_cfg = load_config(restored / "resolved_config.yaml")
    assert restored_cfg.model.channels == 8
    assert restored_cfg.model.variant is Variant.DM2
    assert restored_cfg.stft.n_fft == 64

    report_dir = tmp_path / "report"
    evaluate_argv = ["evaluate", "--manifest", str(manifest), "--out", str(report_dir)]
    assert cli.main([*evaluate_argv, "--restored", str(restored)]) == EXIT_OK
    assert cli.main([*evaluate_argv, "--noisy"]) == EXIT_OK
    assert (report_dir / "restored.jsonl").is_file()
    assert (report_dir / "noisy.jsonl").is_file()
    assert "LSD" in capsys.readouterr().out


def test_evaluate_needs_a_source(tmp_path: Path) -> None:
    with pytest.raises(SystemExit):
        cli.main(["evaluate", "--manifest", str(tmp_path / "m.jsonl"), "--out", str(tmp_path)])


def test_empty_manifest_exits_with_data_code(tmp_path: Path) -> None:
    manifest = write_manifest(tmp_path / "manifest.jsonl", [])
    assert cli.main(["evaluate", "--manifest", str(manifest), "--noisy", "--out", str(tmp_path / "r")]) == EXIT_DATA


def test_bad_config_exits_with_config_code(tmp_path: Path) -> None:
    path = tmp_path / "bad.yaml"
    path.write_text("train: {learning_rate: 0.1}\n")
    assert cli.main(["--config", str(path), "params"]) == EXIT_CONFIG


def test_params(config_file: Path, capsys: pytest.CaptureFixture[str]) -> None:
    assert cli.main(["--config", str(config_file), "params"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert [line.split()[0] for line in lines] == [v.value for v in Variant]
    counts = {line.split()[0]: int(line.split()[1]) for line in lines}
    assert counts["dm2"] == counts["dm1"] + 1
    assert cli.main(["--config", str(config_file), "params", "--variant", "s1"]) == EXIT_OK
    assert capsys.readouterr().out.split()[:2] == ["s1", str(counts["s1"])]


def test_plot_label_mismatch(tmp_path: Path) -> None:
    args = ["plot", str(tmp_path / "a.wav"), str(tmp_path / "b.wav"), "--labels", "only", "--out", str(tmp_path)]
    assert cli.main(args) == EXIT_CONFIG


def test_paths_resolve_against_workdir(
    config_file: Path,
    audio_dirs: tuple[Path, Path],
    tmp_path: Path,
) -> None:
    """Test that relative paths land under --workdir and the resolved document records the invocation."""
    clean_dir, noise_dir = audio_dirs
    argv = ["--workdir", str(tmp_path), "--config", config_file.name, "simulate"]
    argv += ["--clean", str(clean_dir), "--noise", str(noise_dir), "--out", "corpus", "--count", "2", "--verify"]
    assert cli.main(argv) == EXIT_OK
    out = tmp_path / "corpus"
    assert (out / "manifest.jsonl").is_file()
    assert (out / "verification.jsonl").is_file()
    command = yaml.safe_load((out / "resolved_config.yaml").read_text())["command"]
    assert command["command"] == "simulate"
    assert command["out"] == str(out)
    assert command["config"] == str(config_file)
    assert command["clean"] == str(clean_dir)
    assert command["verify"] is True
    assert command["workdir"] == str(tmp_path)
    assert load_config(out / "resolved_config.yaml").simulate.count == 2
