#include "dan/cli.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "dan/checkpoint.hpp"
#include "dan/decode.hpp"
#include "dan/embeddings.hpp"
#include "dan/errors.hpp"
#include "dan/gradcheck.hpp"
#include "dan/synth.hpp"
#include "dan/training.hpp"
#include "json.hpp"

namespace dan {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Raised for flag combinations that parse but make no sense; maps to the
// usage exit code.
struct UsageError : Error {
    using Error::Error;
};

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write " + path.string());
    return out;
}

PolarityMix parse_mix(const std::string& text) {
    PolarityMix mix{};
    std::stringstream ss(text);
    std::string part;
    std::size_t k = 0;
    while (std::getline(ss, part, ',')) {
        if (k >= mix.size()) throw UsageError("--mix takes exactly three comma-separated weights");
        try {
            std::size_t used = 0;
            mix[k] = std::stod(part, &used);
            if (used != part.size()) throw std::invalid_argument(part);
        } catch (const std::exception&) {
            throw UsageError("--mix: '" + part + "' is not a number");
        }
        ++k;
    }
    if (k != mix.size()) throw UsageError("--mix takes exactly three comma-separated weights");
    try {
        validate_mix(mix);
    } catch (const ConfigError& e) {
        throw UsageError(std::string("--mix: ") + e.what());
    }
    return mix;
}

// Every option of a subcommand with its parsed value(s), for manifests.
json flag_snapshot(const CLI::App& cmd) {
    json flags = json::object();
    for (const CLI::Option* opt : cmd.get_options()) {
        const std::string name = opt->get_name(false, true);
        if (name.empty() || name == "--help" || name == "-h") continue;
        const auto& results = opt->results();
        if (results.empty()) {
            flags[name] = opt->get_default_str();
        } else if (results.size() == 1) {
            flags[name] = results.front();
        } else {
            flags[name] = results;
        }
    }
    return flags;
}

void write_manifest(const fs::path& path, const CLI::App& app, const CLI::App& cmd, const std::string& started,
                    json extra) {
    json m;
    m["command"] = cmd.get_name();
    m["flags"] = flag_snapshot(cmd);
    m["started_at"] = started;
    m["finished_at"] = utc_now();
    m["rerun_config"] = app.config_to_str(false, false);
    for (auto& [k, v] : extra.items()) m[k] = v;
    open_out(path) << m.dump(2) << "\n";
}

struct ModelFlags {
    std::string preset = "full";
    std::string task;
    std::string variant = "dan";
    std::size_t epochs = 50;
    std::size_t batch = 128;
    double lr = 0.001;
    double dropout = 0.1;
    std::size_t d_e = 300;
    std::size_t blstm = 128;
    std::size_t tq = 82;
    std::size_t ta = 82;
    std::uint64_t seed = 1;
    std::size_t patience = 5;
    double clip_norm = 0.0;
    std::string vectors;
    std::string ngram_vectors;

    CLI::Option* d_e_opt = nullptr;
    CLI::Option* blstm_opt = nullptr;
    CLI::Option* tq_opt = nullptr;
    CLI::Option* ta_opt = nullptr;
};

void add_model_flags(CLI::App* cmd, ModelFlags& f, bool with_variant) {
    cmd->add_option("--preset", f.preset, "full (d_e 300, blstm 128, T 82) or micro (d_e 64, blstm 64, T 24)")
        ->check(CLI::IsMember({"full", "micro"}))
        ->capture_default_str();
    cmd->add_option("--task", f.task, "compat or satisf; defaults to the corpus task");
    if (with_variant) {
        cmd->add_option("--variant", f.variant, "dan, dan-no-ans-attn, qa-s-blstm or qa-coattention")
            ->capture_default_str();
    }
    cmd->add_option("--epochs", f.epochs, "maximum epochs")->capture_default_str();
    cmd->add_option("--batch", f.batch, "mini-batch size")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--lr", f.lr, "Adam learning rate")->capture_default_str();
    cmd->add_option("--dropout", f.dropout, "dropout rate")->capture_default_str();
    f.d_e_opt = cmd->add_option("--d-e", f.d_e, "word embedding size")->capture_default_str();
    f.blstm_opt = cmd->add_option("--blstm", f.blstm, "BLSTM output width (both directions)")->capture_default_str();
    f.tq_opt = cmd->add_option("--tq", f.tq, "question length")->capture_default_str();
    f.ta_opt = cmd->add_option("--ta", f.ta, "answer length")->capture_default_str();
    cmd->add_option("--seed", f.seed, "seed for the split, initialization, shuffling and dropout")
        ->capture_default_str();
    cmd->add_option("--patience", f.patience, "epochs without validation improvement before stopping")
        ->capture_default_str();
    cmd->add_option("--clip-norm", f.clip_norm, "global gradient-norm clip, 0 disables")->capture_default_str();
    cmd->add_option("--vectors", f.vectors, "pretrained word vectors (text format)")->check(CLI::ExistingFile);
    cmd->add_option("--ngram-vectors", f.ngram_vectors, "character n-gram vectors for unknown words")
        ->check(CLI::ExistingFile);
}

ModelConfig model_config(const ModelFlags& f, Task task, Variant variant) {
    ModelConfig cfg;
    if (f.preset == "micro") {
        const ModelConfig micro = ModelConfig::micro();
        cfg.embed_dim = f.d_e_opt->count() ? f.d_e : micro.embed_dim;
        cfg.blstm_dim = f.blstm_opt->count() ? f.blstm : micro.blstm_dim;
        cfg.question_len = f.tq_opt->count() ? f.tq : micro.question_len;
        cfg.answer_len = f.ta_opt->count() ? f.ta : micro.answer_len;
    } else {
        cfg.embed_dim = f.d_e;
        cfg.blstm_dim = f.blstm;
        cfg.question_len = f.tq;
        cfg.answer_len = f.ta;
    }
    cfg.variant = variant;
    cfg.task = task;
    cfg.dropout_rate = f.dropout;
    cfg.seed = f.seed;
    cfg.validate();
    return cfg;
}

TrainConfig train_config(const ModelFlags& f) {
    TrainConfig tc;
    tc.batch_size = f.batch;
    tc.max_epochs = f.epochs;
    tc.patience = f.patience;
    tc.seed = f.seed;
    tc.lr = f.lr;
    tc.clip_norm = f.clip_norm;
    return tc;
}

// Corpus task, checked against --task when given. Every pair must be labeled
// and belong to one task.
Task labeled_corpus_task(const std::vector<QAPair>& pairs, const std::string& flag) {
    if (pairs.empty()) throw ValidationError("corpus is empty");
    const Task task = flag.empty() ? pairs.front().task : parse_task(flag);
    for (const auto& p : pairs) {
        if (p.task != task) {
            throw ValidationError("pair '" + p.id + "' is a " + std::string(task_name(p.task)) +
                                  " pair; expected " + std::string(task_name(task)));
        }
        if (!p.labels) throw ValidationError("pair '" + p.id + "' has no gold labels");
    }
    return task;
}

struct TrainedRun {
    Model model;
    Vocab vocab;
    FitResult fit;
    MetricsReport test;
};

TrainedRun train_run(const Split& sp, const ModelConfig& cfg, const ModelFlags& f, const fs::path& out_dir,
                     std::ostream& log) {
    Vocab vocab = Vocab::build(sp.train);
    const auto train = encode_all(sp.train, vocab, cfg);
    const auto valid = encode_all(sp.valid, vocab, cfg);
    const auto test = encode_all(sp.test, vocab, cfg);

    Model model = Model::build(cfg, vocab.size());
    if (!f.vectors.empty()) {
        PretrainedVectors vectors = load_vectors(f.vectors, cfg.embed_dim);
        if (!f.ngram_vectors.empty()) load_ngram_vectors(vectors, f.ngram_vectors);
        EmbeddingTable table = init_table(vocab, &vectors, cfg.embed_dim, mix_seed(cfg.seed ^ 0x656d62ULL));
        std::copy(table.weight.values().begin(), table.weight.values().end(),
                  model.embedding().weight.values().begin());
    }

    CheckpointMeta meta;
    meta.vocab_tokens = vocab.tokens();
    meta.vocab_hash = vocab.hash();
    meta.split_seed = f.seed;

    FitHooks hooks;
    hooks.log = &log;
    if (!out_dir.empty()) {
        hooks.on_best = [&](const Model& m, const EpochRecord& rec) {
            char name[64];
            std::snprintf(name, sizeof(name), "epoch-%03zu-valid-%.4f.ckpt", rec.epoch, rec.valid.avg_f1);
            CheckpointMeta named = meta;
            named.extra = {{"epoch", rec.epoch}, {"valid_f1", rec.valid.avg_f1}};
            save_checkpoint(out_dir / name, m, named);
        };
    }
    FitResult fit_result = fit(model, train, valid, train_config(f), hooks);
    MetricsReport test_report = evaluate(model, test);

    if (!out_dir.empty()) {
        meta.extra = {{"epoch", fit_result.best_epoch}, {"valid_f1", fit_result.best_valid_f1}};
        save_checkpoint(out_dir / "best.ckpt", model, meta);
        auto hist = open_out(out_dir / "history.jsonl");
        for (const auto& rec : fit_result.history) {
            hist << json{{"epoch", rec.epoch}, {"train_loss", rec.train_loss}, {"valid", rec.valid.to_json()}}.dump()
                 << "\n";
        }
    }
    return {std::move(model), std::move(vocab), std::move(fit_result), std::move(test_report)};
}

json tuple_json(const ExtractionTuple& t, const LabelSpace& space) {
    json j;
    j["product_id"] = t.product_id;
    j["target"] = t.target ? json(t.target->text) : json(nullptr);
    j["target_span"] = t.target ? json::array({t.target->begin, t.target->end}) : json(nullptr);
    json fws = json::array();
    for (const auto& fw : t.function_words) fws.push_back({{"text", fw.text}, {"span", {fw.begin, fw.end}}});
    j["function_words"] = fws;
    j["polarity"] = t.polarity;
    j["polarity_name"] = space.polarity_names().at(static_cast<std::size_t>(t.polarity - 1));
    return j;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Dual attention sequence labeling for product compatibility and function satisfiability"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read flags from a TOML/INI file (a manifest's rerun_config)")
        ->envname("DAN_CONFIG");
    const std::string started = utc_now();

    // synth
    auto* synth = app.add_subcommand("synth", "generate a labeled synthetic corpus");
    std::size_t synth_n = 0;
    std::string synth_task, synth_mix = "0.34,0.33,0.33", synth_out;
    std::uint64_t synth_seed = 1;
    synth->add_option("--n", synth_n, "number of pairs")->required()->check(CLI::PositiveNumber);
    synth->add_option("--task", synth_task, "compat or satisf")->required()->check(CLI::IsMember({"compat", "satisf"}));
    synth->add_option("--seed", synth_seed)->capture_default_str();
    synth->add_option("--mix", synth_mix, "polarity weights p1,p2,p3 summing to 1")->capture_default_str();
    synth->add_option("--out", synth_out, "output JSONL path")->required();

    // train
    auto* train = app.add_subcommand("train", "train one model and write the best checkpoint");
    ModelFlags tf;
    std::string train_corpus, train_out;
    train->add_option("--corpus", train_corpus, "labeled JSONL corpus")->required()->check(CLI::ExistingFile);
    train->add_option("--out", train_out, "output directory")->required();
    add_model_flags(train, tf, true);

    // eval
    auto* eval = app.add_subcommand("eval", "score a checkpoint on a labeled corpus");
    std::string eval_ckpt, eval_corpus, eval_split = "test", eval_report;
    bool eval_gold = false;
    eval->add_option("--checkpoint", eval_ckpt)->required()->check(CLI::ExistingFile);
    eval->add_option("--corpus", eval_corpus)->required()->check(CLI::ExistingFile);
    eval->add_option("--split", eval_split, "test: the held-out split of the training corpus; all: every pair")
        ->check(CLI::IsMember({"test", "all"}))
        ->capture_default_str();
    eval->add_option("--report-out", eval_report, "write the JSON report here");
    eval->add_flag("--labels-as-predictions", eval_gold, "debug: score the gold labels against themselves");

    // predict
    auto* predict = app.add_subcommand("predict", "extract tuples with a checkpoint");
    std::string pred_ckpt, pred_in, pred_out;
    predict->add_option("--checkpoint", pred_ckpt)->required()->check(CLI::ExistingFile);
    predict->add_option("--in", pred_in, "JSONL corpus, labels optional")->required()->check(CLI::ExistingFile);
    predict->add_option("--out", pred_out, "output JSONL of tuples")->required();

    // gradcheck
    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of every gradient");
    GradcheckOptions gopts;
    std::string corrupt_op;
    gradcheck->add_option("--seed", gopts.seed)->capture_default_str();
    gradcheck->add_option("--eps", gopts.eps, "central-difference step")->capture_default_str();
    gradcheck->add_option("--tolerance", gopts.tolerance, "maximum relative error")->capture_default_str();
    gradcheck->add_option("--corrupt-op", corrupt_op, "test fixture: scale this op's backward rule by 1.5")
        ->group("");

    // report
    auto* report = app.add_subcommand("report", "train and score all four variants, one table row each");
    ModelFlags rf;
    std::string report_corpus, report_out;
    report->add_option("--corpus", report_corpus, "labeled JSONL corpus")->required()->check(CLI::ExistingFile);
    report->add_option("--out", report_out, "output directory");
    add_model_flags(report, rf, false);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << "run with --help for usage\n";
        return kExitUsage;
    }

    try {
        if (*synth) {
            const PolarityMix mix = parse_mix(synth_mix);
            const auto pairs = synth_generate(synth_n, parse_task(synth_task), synth_seed, mix);
            auto os = open_out(synth_out);
            for (const auto& p : pairs) os << pair_to_json_line(p) << '\n';
            os.close();
            write_manifest(fs::path(synth_out).string() + ".manifest.json", app, *synth, started,
                           {{"seed", synth_seed}, {"output", synth_out}});
            out << "wrote " << pairs.size() << " pairs to " << synth_out << "\n";
        } else if (*train) {
            const auto pairs = load_corpus(train_corpus);
            const Task task = labeled_corpus_task(pairs, tf.task);
            const ModelConfig cfg = model_config(tf, task, parse_variant(tf.variant));
            const Split sp = split(pairs, tf.seed);
            const fs::path dir(train_out);
            fs::create_directories(dir);
            TrainedRun run = train_run(sp, cfg, tf, dir, err);
            write_manifest(dir / "manifest.json", app, *train, started,
                           {{"seed", tf.seed},
                            {"config", config_to_json(cfg)},
                            {"corpus", train_corpus},
                            {"checkpoint", (dir / "best.ckpt").string()},
                            {"best_epoch", run.fit.best_epoch},
                            {"test", run.test.to_json()}});
            out << "best epoch " << run.fit.best_epoch << ", test " << (task == Task::Compat ? "PCA" : "FSA")
                << " F1 " << run.test.avg_f1 << "\ncheckpoint " << (dir / "best.ckpt").string() << "\n";
        } else if (*eval) {
            Checkpoint ck = load_checkpoint(eval_ckpt);
            const ModelConfig& cfg = ck.model.config();
            const auto pairs = load_corpus(eval_corpus);
            if (!pairs.empty() && pairs.front().task != cfg.task) {
                throw UsageError("checkpoint is a " + std::string(task_name(cfg.task)) + " model, corpus holds " +
                                 std::string(task_name(pairs.front().task)) + " pairs");
            }
            labeled_corpus_task(pairs, std::string(task_name(cfg.task)));
            const Vocab vocab = Vocab::from_tokens(ck.meta.vocab_tokens);
            if (vocab.hash() != ck.meta.vocab_hash) {
                throw ValidationError("checkpoint vocabulary does not match its recorded hash");
            }
            std::vector<QAPair> subset = pairs;
            if (eval_split == "test") {
                Split sp = split(pairs, ck.meta.split_seed);
                const std::uint64_t h = Vocab::build(sp.train).hash();
                if (h != ck.meta.vocab_hash) {
                    throw ValidationError(
                        "vocabulary hash mismatch: the training split of this corpus does not reproduce the "
                        "checkpoint's vocabulary, so it is not the corpus the model was trained on; use "
                        "--split all to score every pair with the stored vocabulary");
                }
                subset = std::move(sp.test);
            }
            const auto data = encode_all(subset, vocab, cfg);
            MetricsReport rep;
            if (eval_gold) {
                std::vector<LabelSeq> gold;
                for (const auto& ex : data) gold.push_back(ex.labels);
                rep = score(cfg.task, gold, gold);
            } else {
                rep = evaluate(ck.model, data);
            }
            out << render_table(cfg.task, {{std::string(variant_display_name(cfg.variant)), rep}});
            out << rep.to_json().dump(2) << "\n";
            if (!eval_report.empty()) {
                json j = rep.to_json();
                j["method"] = std::string(variant_display_name(cfg.variant));
                j["split"] = eval_split;
                j["examples"] = data.size();
                open_out(eval_report) << j.dump(2) << "\n";
            }
        } else if (*predict) {
            Checkpoint ck = load_checkpoint(pred_ckpt);
            const ModelConfig& cfg = ck.model.config();
            const auto pairs = load_corpus(pred_in);
            for (const auto& p : pairs) {
                if (p.task != cfg.task) {
                    throw UsageError("checkpoint is a " + std::string(task_name(cfg.task)) + " model, pair '" +
                                     p.id + "' is " + std::string(task_name(p.task)));
                }
            }
            const Vocab vocab = Vocab::from_tokens(ck.meta.vocab_tokens);
            std::vector<QAPair> unlabeled = pairs;
            for (auto& p : unlabeled) p.labels.reset();
            const auto data = encode_all(unlabeled, vocab, cfg);
            const auto labels = predict_all(ck.model, data);
            auto os = open_out(pred_out);
            for (std::size_t i = 0; i < pairs.size(); ++i) {
                json tuples = json::array();
                for (const auto& t : decode_tuples(labels[i], pairs[i].question, pairs[i].product_id, ck.model.labels())) {
                    tuples.push_back(tuple_json(t, ck.model.labels()));
                }
                json line = {{"id", pairs[i].id}, {"product_id", pairs[i].product_id}, {"tuples", tuples}};
                os << line.dump() << "\n";
            }
            out << "wrote tuples for " << pairs.size() << " pairs to " << pred_out << "\n";
        } else if (*gradcheck) {
            debug::set_corrupted_op(corrupt_op);
            const GradcheckReport rep = gradcheck_suite(gopts);
            debug::set_corrupted_op("");
            rep.print(out);
            if (!rep.passed()) {
                err << "gradient check failed: " << rep.first_failure() << "\n";
                return kExitNumeric;
            }
            out << "gradient check passed\n";
        } else if (*report) {
            const auto pairs = load_corpus(report_corpus);
            const Task task = labeled_corpus_task(pairs, rf.task);
            const Split sp = split(pairs, rf.seed);
            std::vector<std::pair<std::string, MetricsReport>> rows;
            json all = json::array();
            for (auto v : {Variant::QaSBlstm, Variant::QaCoAttention, Variant::DanNoAnswerAttention, Variant::Dan}) {
                const ModelConfig cfg = model_config(rf, task, v);
                err << "training " << variant_display_name(v) << "\n";
                fs::path dir;
                if (!report_out.empty()) {
                    dir = fs::path(report_out) / std::string(variant_name(v));
                    fs::create_directories(dir);
                }
                TrainedRun run = train_run(sp, cfg, rf, dir, err);
                rows.emplace_back(std::string(variant_display_name(v)), run.test);
                json j = run.test.to_json();
                j["method"] = std::string(variant_display_name(v));
                j["best_epoch"] = run.fit.best_epoch;
                all.push_back(j);
            }
            const std::string table = render_table(task, rows);
            out << table;
            if (!report_out.empty()) {
                open_out(fs::path(report_out) / "report.md") << table;
                open_out(fs::path(report_out) / "report.json") << all.dump(2) << "\n";
                write_manifest(fs::path(report_out) / "manifest.json", app, *report, started,
                               {{"seed", rf.seed}, {"corpus", report_corpus}});
            }
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const json::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitOk;
}

int run_cli(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run_cli(args, std::cout, std::cerr);
}

}  // namespace dan
