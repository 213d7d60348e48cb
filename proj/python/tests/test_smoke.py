"""End-to-end smoke of the compiled module: generate, noise, train, decode."""

import pytest

import sead


@pytest.fixture(scope="module")
def corpus():
    return sead.gen_synthetic_corpus(seed=11, n_tables=3, n_train=40, n_dev=12)


def test_synthetic_shapes(corpus):
    assert len(corpus.tables) == 3
    assert len(corpus.train) == 40
    assert len(corpus.dev) == 12
    rec = corpus.train.records[0]
    assert rec.table_id in corpus.tables
    assert rec.question
    table = corpus.tables[rec.table_id]
    assert table.width == len(table.header)
    assert all(len(row) == table.width for row in table.rows)


def test_sql_round_trip(corpus):
    rec = corpus.train.records[0]
    schema = sead.schema_of(corpus.tables[rec.table_id])
    tokens = sead.serialize_sql(rec.gold, schema)
    back = sead.parse_sql(tokens, schema)
    assert sead.canonicalize(back) == sead.canonicalize(rec.gold)


def test_parse_rejects_garbage(corpus):
    schema = sead.schema_of(next(iter(corpus.tables.values())))
    with pytest.raises(ValueError):
        sead.parse_sql(["select", "from", "nowhere"], schema)


def test_execute_gold_queries(corpus):
    hits = 0
    for rec in corpus.train.records:
        result = sead.execute(rec.gold, corpus.tables[rec.table_id])
        if not result.empty:
            hits += 1
    # gold queries come from actual cells; most must hit
    assert hits > len(corpus.train.records) // 2


def test_execute_mismatch_raises(corpus):
    table = next(iter(corpus.tables.values()))
    bad = sead.SqlQuery(select_column=table.width + 5)
    with pytest.raises(RuntimeError):
        sead.execute(bad, table)


def test_noising_instances(corpus):
    rec = corpus.train.records[0]
    schema = sead.schema_of(corpus.tables[rec.table_id])

    clean = sead.clean_instance(rec, schema)
    assert clean.source[0] == "<2sql>"
    assert clean.direction == sead.Direction.TO_SQL

    noise = sead.NoiseConfig()
    seen = set()
    for seed in range(6):
        inst = sead.make_instance(rec, schema, noise, seed, corpus.tables)
        assert inst.source and inst.target
        seen.add(tuple(inst.source))
    assert len(seen) > 1  # different seeds draw different noise

    same_a = sead.make_instance(rec, schema, noise, 42, corpus.tables)
    same_b = sead.make_instance(rec, schema, noise, 42, corpus.tables)
    assert same_a.source == same_b.source


def test_bleu_identity():
    refs = [["select", "a", "from", "b", "where", "c"]] * 3
    assert sead.corpus_bleu(refs, refs) == pytest.approx(100.0)
    assert sead.corpus_bleu([["x", "y", "z", "w"]], refs[:1]) == 0.0


def test_train_decode_eval(tmp_path, corpus):
    vocab = sead.build_vocab(corpus.train, corpus.tables)
    assert len(vocab) > 50

    mc = sead.ModelConfig()
    mc.layers = 1
    mc.hidden = 32
    mc.heads = 2
    mc.ffn = 64
    model = sead.Transformer(mc, len(vocab), seed=3)
    assert model.param_count > 0

    tc = sead.TrainConfig()
    tc.epochs = 2
    tc.batch_size = 8
    tc.seed = 3
    result = sead.train_model(model, vocab, corpus.train, corpus.dev,
                              corpus.tables, tc)
    assert len(result.history) == 2
    assert result.steps > 0

    rec = corpus.dev.records[0]
    table = corpus.tables[rec.table_id]
    schema = sead.schema_of(table)
    source = sead.clean_instance(rec, schema).source

    seq = sead.greedy_decode(model, vocab, source)
    assert isinstance(seq.tokens, list)

    eg = sead.eg_decode(model, vocab, source, schema, table)
    assert eg.status in (sead.EgStatus.VALIDATED, sead.EgStatus.DEGRADED,
                         sead.EgStatus.NO_PARSEABLE)

    opts = sead.EvalOptions()
    opts.mode = sead.DecodeMode.GREEDY
    report = sead.evaluate_split(model, vocab, corpus.dev, corpus.tables, opts)
    assert report.n == len(corpus.dev)
    assert 0.0 <= report.acc_lf <= 1.0
    assert report.to_json().startswith("{")

    run_dir = tmp_path / "run"
    sead.save_run(str(run_dir), model, vocab)
    model2, vocab2 = sead.load_run(str(run_dir))
    assert len(vocab2) == len(vocab)
    seq2 = sead.greedy_decode(model2, vocab2, source)
    assert seq2.tokens == seq.tokens
