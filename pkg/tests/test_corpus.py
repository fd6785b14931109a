import csv
import io
from collections import defaultdict

import numpy as np
import pytest
from helpers import table1_counts, table1_rows, to_csv

from artinv.corpus import (
    ANALYSIS_COLUMNS,
    FIGURES,
    IngestError,
    ResultRow,
    RunMetadata,
    aggregate,
    analysis_rows,
    emit_plot_data,
    export_analysis_table,
    figure_groupings,
    ingest_frames,
    plot_tables,
    read_analysis_table,
    read_metadata,
    read_results,
    run_corpus,
    speaker_means,
    write_corpus_outputs,
)
from artinv.inversion import InversionConfig
from artinv.model import ArticulatoryVector
from artinv.records import AGE_BANDS, PERIODS, VowelFrameRecord, age_band
from artinv.synthetic import make_speakers, synthesize_records

HEADER = "speaker_id,gender,age,period,vowel,f1,f2,f3,f4,duration_ms,source\n"
META = RunMetadata("test", 0)
FAST = InversionConfig(restarts=2, max_iter=60)


# -- ingestion


def test_long_duration_rejected():
    rep = ingest_frames(HEADER + "s1,F,30,1955-56,a,700,1200,2500,3500,250,x\n")
    assert rep.rows_out == 0
    assert rep.counts_by_reason() == {"duration": 1}
    assert rep.rejections[0].line == 2


def test_formant_order_rejected():
    rep = ingest_frames(HEADER + "s1,F,30,1955-56,a,700,600,2500,3500,80,x\n")
    assert rep.counts_by_reason() == {"formant order": 1}


def test_each_bad_row_gets_a_reason():
    rows = [
        "s1,F,30,1955-56,a,700,1200,2500,3500,80,ok",
        "s1,X,30,1955-56,a,700,1200,2500,3500,80,gender",
        "s1,F,30,1960-61,a,700,1200,2500,3500,80,period",
        "s1,F,30,1955-56,q,700,1200,2500,3500,80,vowel",
        "s1,F,abc,1955-56,a,700,1200,2500,3500,80,parse",
        "s1,F,30,1955-56,a,700,1200,2500",
        "s1,F,30,1955-56,a,-5,1200,2500,3500,80,value",
        "s1,F,30,1955-56,a,700,1200,2500,3500,0,dur",
        "s1,F,200,1955-56,a,700,1200,2500,3500,80,age",
        ",F,30,1955-56,a,700,1200,2500,3500,80,speaker",
        "s1,F,30,1955-56,a,700,1200,nan,3500,80,nan",
    ]
    rep = ingest_frames(HEADER + "\n".join(rows) + "\n")
    assert rep.rows_in == len(rows)
    assert rep.rows_out == 1
    assert rep.counts_by_reason() == {
        "age": 1, "duration": 1, "field count": 1, "formant value": 1, "gender": 1,
        "period": 1, "speaker": 1, "unparseable": 2, "vowel": 1,
    }
    assert rep.conserved()


def test_unknown_column_is_an_error():
    with pytest.raises(IngestError, match="pitch"):
        ingest_frames(HEADER.strip() + ",pitch\n")


def test_missing_column_is_an_error():
    with pytest.raises(IngestError, match="source"):
        ingest_frames(HEADER.replace(",source", "") + "s1,F,30,1955-56,a,700,1200,2500,3500,80\n")


def test_column_order_may_vary():
    rep = ingest_frames("vowel,speaker_id,gender,age,period,f1,f2,f3,f4,duration_ms,source\n"
                        "i,s1,M,44,2015-16,300,2200,2900,3600,60,x\n")
    assert rep.records[0].vowel == "i" and rep.records[0].age == 44.0


def test_metadata_lines_skipped(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("# artinv 0.1.0\n# seed 3\n" + HEADER + "s1,F,30,1955-56,a,700,1200,2500,3500,80,x\n")
    rep = ingest_frames(p)
    assert rep.rows_in == 1 and rep.rows_out == 1


def test_table1_fixture_speaker_counts():
    rep = ingest_frames(to_csv(table1_rows()))
    assert not rep.rejections
    counts = rep.speaker_counts()
    assert counts[("F", "20-35", "1955-56")] == 18
    assert counts == table1_counts()
    assert sum(counts.values()) == 1025


def test_conservation_with_mixed_rows():
    lines = table1_rows(1, seed=4)[:50]
    lines[3][9] = "250.0"
    lines[7][5], lines[7][6] = lines[7][6], lines[7][5]
    lines[8] = lines[8][:5]
    rep = ingest_frames(to_csv(lines))
    assert rep.rows_in == 50
    assert rep.rows_out + len(rep.rejections) == 50
    assert rep.counts_by_reason() == {"duration": 1, "field count": 1, "formant order": 1}


# -- orchestration


@pytest.fixture(scope="module")
def small_corpus(model):
    spk = make_speakers(2, "S", "F", "1955-56", seed=1)
    recs, _ = synthesize_records(spk, ["a", "i", "u"], 5, model, seed=2)
    return recs


@pytest.fixture(scope="module")
def small_result(small_corpus, model):
    return run_corpus(small_corpus, model, FAST)


def test_two_speakers_three_vowels_five_realizations(small_result):
    assert len(small_result.rows) == 30
    assert len(small_result.speakers) == 2
    assert [s.inverted for s in small_result.speakers] == [15, 15]


def test_rerun_gives_identical_files(small_corpus, model, tmp_path):
    outs = []
    for d in ("a", "b"):
        res = run_corpus(small_corpus, model, FAST, work_dir=tmp_path / d, meta=META)
        paths = write_corpus_outputs(tmp_path / d, res, None, META)
        outs.append({k: p.read_bytes() for k, p in paths.items()})
    assert outs[0] == outs[1]


def test_parallel_matches_serial(small_corpus, model, small_result):
    par = run_corpus(small_corpus, model, FAST, workers=2)
    assert [r.as_row() for r in par.rows] == [r.as_row() for r in small_result.rows]


def test_resume_reuses_speaker_files(small_corpus, model, tmp_path):
    first = run_corpus(small_corpus, model, FAST, work_dir=tmp_path, meta=META)
    again = run_corpus(small_corpus, model, FAST, work_dir=tmp_path, meta=META)
    assert again.resumed == ["S000", "S001"]
    assert [r.as_row() for r in again.rows] == [r.as_row() for r in first.rows]
    assert again.speakers == first.speakers
    changed = run_corpus(small_corpus, model, FAST, work_dir=tmp_path, meta=RunMetadata("other", 0))
    assert changed.resumed == []


def test_speaker_without_valid_records_skipped(model):
    bad = VowelFrameRecord("z", "M", 40.0, "1995-96", "a", 900.0, 800.0, 2500.0, 3500.0, 80.0)
    res = run_corpus([bad], model, FAST)
    assert res.rows == [] and [s.speaker_id for s in res.skipped] == ["z"]


def test_results_table_round_trip(small_result, tmp_path):
    paths = write_corpus_outputs(tmp_path, small_result, None, META)
    again = read_results(paths["results"])
    assert [r.as_row() for r in again] == [r.as_row() for r in small_result.rows]
    with open(paths["results"]) as fh:
        meta = read_metadata(fh)
    assert meta == {"artinv": META.version, "config_hash": "test", "seed": "0"}


# -- aggregation


def fake_rows(spec, seed=0):
    """spec: list of (speaker, gender, age, period, n_rows)."""
    rng = np.random.default_rng(seed)
    rows = []
    for sid, g, age, period, n in spec:
        for k in range(n):
            x = rng.uniform(-2, 2, 7)
            rec = VowelFrameRecord(sid, g, age, period, "a", 500.0, 1500.0, 2500.0, 3500.0, 80.0, f"{sid}:{k}")
            rows.append(ResultRow(rec, 1.0, ArticulatoryVector.from_array(x), 1.0, True))
    return rows


def brute_force(rows, grouping):
    per = defaultdict(list)
    meta = {}
    for r in rows:
        per[r.record.speaker_id].append((r.x.larynx_height, r.x.lip_protrusion))
        rec = r.record
        meta[rec.speaker_id] = {"gender": rec.gender, "age_band": age_band(rec.age), "period": rec.period}
    groups = defaultdict(list)
    for sid, vals in per.items():
        lh = sum(v[0] for v in vals) / len(vals)
        lp = sum(v[1] for v in vals) / len(vals)
        groups[tuple(meta[sid][g] for g in grouping)].append((lh, lp))
    return {k: (sum(v[0] for v in vs) / len(vs), sum(v[1] for v in vs) / len(vs), len(vs)) for k, vs in groups.items()}


def test_single_speaker_group_is_a_point():
    rows = fake_rows([("a", "F", 30, "1955-56", 5)])
    (s,) = aggregate(rows)
    v = s.value("larynx_height")
    assert v["mean"] == pytest.approx(np.mean([r.lh for r in rows]), rel=1e-14)
    assert v["ci_low"] == v["mean"] == v["ci_high"]
    assert s.n_speakers == 1


def test_group_means_match_brute_force():
    rng = np.random.default_rng(5)
    spec = [(f"s{i}", "FM"[i % 2], float(rng.integers(20, 80)), PERIODS[i % 4], int(rng.integers(1, 40)))
            for i in range(120)]
    rows = fake_rows(spec, seed=6)
    assert len(rows) <= 10_000
    for grouping in (("gender", "age_band", "period"), ("gender",), ("period",), ("gender", "age_band")):
        oracle = brute_force(rows, grouping)
        stats = aggregate(rows, grouping, resamples=200)
        assert {s.key for s in stats} == set(oracle)
        for s in stats:
            lh, lp, n = oracle[s.key]
            assert s.n_speakers == n
            assert s.mean == pytest.approx((lh, lp), rel=1e-12, abs=1e-14)
            assert all(lo <= m <= hi for lo, m, hi in zip(s.ci_low, s.mean, s.ci_high))


def test_speakers_weigh_equally():
    # one chatty speaker must not dominate the group mean
    rows = fake_rows([("a", "F", 30, "1955-56", 1), ("b", "F", 30, "1955-56", 200)])
    (s,) = aggregate(rows, ("gender",))
    sm = speaker_means(rows)
    assert s.mean[0] == pytest.approx((sm[0].values[0] + sm[1].values[0]) / 2, rel=1e-14)
    assert s.mean[0] != pytest.approx(np.mean([r.lh for r in rows]), rel=1e-3)


def test_bootstrap_is_seeded():
    rows = fake_rows([(f"s{i}", "M", 40, "1975-76", 3) for i in range(10)])
    a = aggregate(rows, seed=3)
    assert a == aggregate(rows, seed=3)
    assert a != aggregate(rows, seed=4)


def test_aggregate_rejects_empty_and_unknown_grouping():
    with pytest.raises(ValueError):
        aggregate([])
    with pytest.raises(ValueError):
        aggregate(fake_rows([("a", "F", 30, "1955-56", 1)]), ("vowel",))


# -- exports


def test_analysis_table_schema_and_round_trip():
    rows = fake_rows([("a", "F", 31.5, "1955-56", 4), ("b", "M", 60, "2015-16", 6)])
    text = export_analysis_table(rows, META)
    data = [ln for ln in text.splitlines() if not ln.startswith("#")]
    assert data[0] == "Speaker,Gender,Age,Period,Vowel,LH,LP"
    assert len(data) == 11
    parsed = list(csv.reader(io.StringIO("\n".join(data))))
    assert all(len(r) == len(ANALYSIS_COLUMNS) for r in parsed)
    back = read_analysis_table(text)
    assert back == analysis_rows(rows)
    for (*_, lh, lp), r in zip(back, rows):
        assert lh == r.lh and lp == r.lp


def test_plot_tables_shapes_and_values():
    spec = [(f"s{i}", "FM"[i % 2], [25, 40, 60, 70][(i // 2) % 4], PERIODS[(i // 8) % 4], 2) for i in range(32)]
    rows = fake_rows(spec)
    by = {g: aggregate(rows, g, resamples=100) for g in figure_groupings()}
    tables = plot_tables(by)
    rows_p, missing = tables["lh_by_period"]
    assert [r[0] for r in rows_p] == list(PERIODS) and not missing
    stats = {s.key: s for s in by[("period",)]}
    for x, group, mean, lo, hi in rows_p:
        v = stats[(x,)].value("larynx_height")
        assert (mean, lo, hi) == (v["mean"], v["ci_low"], v["ci_high"])
    lp_rows, _ = tables["lp_by_age_gender"]
    assert len(lp_rows) == 2 * len(AGE_BANDS)
    assert {f.name for f in FIGURES} == set(tables)


def test_missing_group_noted_in_report(tmp_path):
    rows = fake_rows([("a", "F", 30, "1955-56", 2), ("b", "M", 30, "1975-76", 2)])
    by = {g: aggregate(rows, g, resamples=50) for g in figure_groupings()}
    paths = emit_plot_data(by, tmp_path, META)
    report = paths["report"].read_text()
    assert "lh_by_period: no speakers for period=1995-96" in report
    body = [ln for ln in paths["lh_by_period"].read_text().splitlines() if not ln.startswith("#")]
    assert body[0] == "x,group,mean,ci_low,ci_high"
    assert len(body) == 1 + 2
    assert paths["lh_by_period"].read_text().startswith("# artinv ")
