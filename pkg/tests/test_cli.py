import json

import pytest

from ranes.cli import _split_policy_list, main


def test_version_exits_zero(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    out = capsys.readouterr().out
    assert "ranes" in out and "manifest=1" in out


def test_unknown_subcommand_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_missing_required_flag_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["campaign"])  # --out is required
    assert exc.value.code == 2


def test_policy_list_splitting_keeps_heuristic_params():
    assert _split_policy_list("always-on,static:4,2,1") == ["always-on", "static:4,2,1"]
    assert _split_policy_list("static:4,2,1,dynamic:3,2,2,random") == [
        "static:4,2,1", "dynamic:3,2,2", "random",
    ]
    assert _split_policy_list("random") == ["random"]
    assert _split_policy_list("") == []


def test_evaluate_requires_exactly_one_policy(tmp_path):
    code = main([
        "evaluate", "--policies", "always-on,random", "--runs", "1",
        "--sim-duration", "1.0",
    ])
    assert code == 2


@pytest.mark.slow
def test_full_pipeline_smoke(tmp_path, capsys):
    """campaign -> fit-norm -> train (both algos) -> evaluate -> compare."""
    corpus = tmp_path / "corpus"
    norm = tmp_path / "norms.json"
    dqn_ckpt = tmp_path / "dqn.json"
    ppo_ckpt = tmp_path / "ppo.json"
    out = tmp_path / "cmp"

    assert main([
        "campaign", "--out", str(corpus), "--policies", "random,static:4,2,1",
        "--runs-per-combo", "2", "--seed-base", "50",
    ] + ["--spec", _spec_file(tmp_path)]) == 0

    assert main(["fit-norm", "--manifest", str(corpus / "manifest.json"),
                 "--out", str(norm), "--quantiles", "200"]) == 0

    assert main([
        "train", "--algo", "dqn", "--weights", "DQN",
        "--corpus", str(corpus / "manifest.json"), "--norm", str(norm),
        "--out", str(dqn_ckpt), "--max-timesteps", "60", "--trunk", "16,8",
        "--no-conv", "--batch-size", "32", "--sim-duration", "1.0",
    ]) == 0

    assert main([
        "train", "--algo", "ppo", "--weights", "PPO-1",
        "--norm", str(norm), "--out", str(ppo_ckpt),
        "--max-timesteps", "40", "--rollout-steps", "18", "--batch-size", "18",
        "--hidden", "16", "--train-seed-base", "7000", "--eval-seed-base", "7500",
        "--eval-every", "1000000", "--sim-duration", "1.0",
    ]) == 0

    assert main([
        "evaluate", "--checkpoints", str(dqn_ckpt), "--norm", str(norm),
        "--runs", "2", "--seed-base", "8000", "--sim-duration", "1.0",
        "--train-manifest", str(corpus / "manifest.json"),
    ]) == 0

    assert main([
        "compare", "--policies", "always-on,static:4,2,1",
        "--checkpoints", f"{dqn_ckpt},{ppo_ckpt}", "--norm", str(norm),
        "--runs", "2", "--seed-base", "8000", "--out", str(out),
        "--sim-duration", "1.0",
    ]) == 0

    table = (out / "tradeoff.csv").read_text().splitlines()
    assert table[0].startswith("policy,")
    assert len(table) == 5  # always-on, static, dqn, ppo
    assert table[1].split(",")[1] == "100.0"
    assert (out / "cdf_rho_dqn-DQN.csv").exists()


def _spec_file(tmp_path):
    path = tmp_path / "spec.yaml"
    path.write_text("scenario: {sim_duration: 1.0}\n")
    return str(path)


def test_seed_overlap_fails_with_code_1(tmp_path):
    corpus = tmp_path / "corpus"
    assert main([
        "campaign", "--out", str(corpus), "--policies", "always-on",
        "--runs-per-combo", "1", "--seed-base", "123", "--spec", _spec_file(tmp_path),
    ]) == 0
    code = main([
        "evaluate", "--policies", "always-on", "--runs", "1", "--seed-base", "123",
        "--train-manifest", str(corpus / "manifest.json"), "--sim-duration", "1.0",
    ])
    assert code == 1


def test_campaign_failure_exit_code(tmp_path):
    code = main([
        "campaign", "--out", str(tmp_path / "c"), "--policies", "bogus",
        "--runs-per-combo", "1", "--spec", _spec_file(tmp_path),
    ])
    assert code == 1
    manifest = json.loads((tmp_path / "c" / "manifest.json").read_text())
    assert manifest["runs"][0]["status"] == "failed"
