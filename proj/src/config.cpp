#include "paretoscl/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <sstream>

#include "paretoscl/errors.hpp"
#include "paretoscl/rng.hpp"

namespace paretoscl {

namespace {

const std::vector<ConfigKeyDoc> kSchema = {
    {"experiment.mode", "ce_epo", "training mode: ce, ce_ls or ce_epo"},
    {"experiment.seeds", "0,1,2,3,4,5,6,7,8,9", "comma-separated run seeds"},
    {"experiment.fewshot_n", "20", "labelled training examples; 0 selects the full-data protocol"},
    {"experiment.epochs", "auto", "epoch budget; auto = 30 few-shot, 3 full-data"},
    {"experiment.eval_interval", "2", "validation every this many steps"},
    {"experiment.workers", "1", "parallel seeds/cells; 0 = hardware concurrency"},
    {"experiment.dump_embeddings", "false", "write test-set embeddings per seed"},
    {"objective.tau", "0.3", "temperature of the contrastive losses"},
    {"objective.lambda", "0.3", "weight of the contrastive term against cross-entropy"},
    {"objective.r", "0.1,0.9", "preference vector r1,r2 on the simplex"},
    {"objective.epsilon_balance", "1e-5", "EPO non-uniformity threshold between balance and descent"},
    {"optimizer.lr", "1e-3", "AdamW learning rate"},
    {"optimizer.beta1", "0.9", "AdamW first-moment decay"},
    {"optimizer.beta2", "0.999", "AdamW second-moment decay"},
    {"optimizer.eps", "1e-8", "AdamW denominator epsilon"},
    {"optimizer.weight_decay", "0.01", "decoupled weight decay"},
    {"optimizer.batch_size", "16", "rows per class-blocked mini-batch"},
    {"model.hash_dim", "16384", "feature hashing buckets"},
    {"model.ngram_max", "2", "longest word n-gram"},
    {"model.hash_seed", "0", "seed folded into the n-gram hash"},
    {"model.hidden", "256", "hidden layer width"},
    {"model.embedding_dim", "64", "embedding head width"},
    {"model.dropout", "0.1", "dropout rate on the hidden layer"},
    {"data.train", "", "training TSV"},
    {"data.dev", "", "dev (original validation) TSV"},
    {"data.task", "single", "single or pair"},
    {"data.has_header", "true", "whether the TSV files have a header row"},
    {"data.text_column", "auto", "text column; auto = sentence (single) or sentence1 (pair)"},
    {"data.text2_column", "sentence2", "second text column for pair tasks"},
    {"data.label_column", "label", "label column"},
    {"data.labels", "", "explicit comma-separated label order (empty = first appearance)"},
    {"sweep.tau_grid", "0.1,0.3,0.5,0.7,0.9", "temperatures to sweep"},
    {"sweep.lambda_grid", "0.1,0.3,0.5,0.7,0.9", "lambda values to sweep"},
    {"sweep.r1_grid", "0.1,0.3,0.5", "first preference entries to sweep (ls/epo only)"},
    {"toy.solver", "epo", "toy solver: ls or epo"},
    {"toy.dim", "20", "toy parameter dimension"},
    {"toy.steps", "2000", "gradient steps"},
    {"toy.step_size", "0.05", "gradient step size"},
    {"toy.init_seed", "0", "seed of the random initial point"},
    {"toy.init_radius", "2", "initial point drawn uniformly from this ball"},
    {"gradcheck.batches", "20", "random batches to check"},
    {"gradcheck.probes", "50", "coordinates probed per batch and loss"},
    {"gradcheck.fd_step", "1e-5", "central-difference step"},
    {"gradcheck.tolerance", "1e-4", "maximum relative error accepted"},
    {"gradcheck.gc_seed", "0", "seed of the gradient check batches"},
    {"gradcheck.gc_hash_dim", "64", "hash buckets of the checked encoder"},
    {"gradcheck.gc_hidden", "16", "hidden width of the checked encoder"},
    {"gradcheck.gc_embedding_dim", "8", "embedding width of the checked encoder"},
};

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    if (trim(s).empty()) return out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    return out;
}

std::string bare(const std::string& key) { return key.substr(key.find('.') + 1); }

double parse_double(const std::string& key, const std::string& v) {
    const auto t = trim(v);
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(out)) {
        throw ConfigError(bare(key) + ": '" + v + "' is not a finite number", bare(key));
    }
    return out;
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
    const auto t = trim(v);
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
        throw ConfigError(bare(key) + ": '" + v + "' is not a non-negative integer", bare(key));
    }
    return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
    const auto t = trim(v);
    if (t == "true" || t == "1" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "no") return false;
    throw ConfigError(bare(key) + ": '" + v + "' is not a boolean", bare(key));
}

std::vector<double> parse_doubles(const std::string& key, const std::string& v) {
    std::vector<double> out;
    for (const auto& item : split_list(v)) out.push_back(parse_double(key, item));
    if (out.empty()) throw ConfigError(bare(key) + ": list must not be empty", bare(key));
    return out;
}

void require(bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw ConfigError(key + ": " + what, key);
}

PreferenceVector parse_preference(const std::string& key, const std::string& v) {
    const auto parts = parse_doubles(key, v);
    require(parts.size() == 2, bare(key), "expected two comma-separated values");
    try {
        return PreferenceVector(parts[0], parts[1]);
    } catch (const ConfigError& e) {
        throw ConfigError(bare(key) + ": " + e.what(), bare(key));
    }
}

}  // namespace

TrainMode parse_train_mode(const std::string& name) {
    if (name == "ce") return TrainMode::ce;
    if (name == "ce_ls") return TrainMode::ce_ls;
    if (name == "ce_epo") return TrainMode::ce_epo;
    throw ConfigError("mode: '" + name + "' is not one of ce, ce_ls, ce_epo", "mode");
}

const char* to_string(TrainMode mode) noexcept {
    switch (mode) {
        case TrainMode::ce: return "ce";
        case TrainMode::ce_ls: return "ce_ls";
        case TrainMode::ce_epo: return "ce_epo";
    }
    return "ce";
}

const std::vector<ConfigKeyDoc>& config_schema() { return kSchema; }

ConfigStore::ConfigStore() {
    for (const auto& k : kSchema) m_values[k.key] = k.default_value;
}

std::string ConfigStore::qualify(const std::string& key) const {
    if (m_values.count(key)) return key;
    if (key.find('.') == std::string::npos) {
        std::string found;
        for (const auto& k : kSchema) {
            if (bare(k.key) == key) {
                if (!found.empty()) throw ConfigError("ambiguous configuration key '" + key + "'", key);
                found = k.key;
            }
        }
        if (!found.empty()) return found;
    }
    throw ConfigError("unknown configuration key '" + key + "'", key);
}

ConfigStore ConfigStore::from_file(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw UsageError("config file not found: " + path.string());
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(path.string(), tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("cannot parse config: ") + e.what());
    }
    ConfigStore store;
    for (const auto& [section, node] : tree) {
        if (node.empty()) {
            store.set(section, node.data());
            continue;
        }
        for (const auto& [name, leaf] : node) {
            const auto key = section + "." + name;
            if (!store.m_values.count(key)) throw ConfigError("unknown configuration key '" + key + "'", key);
            store.m_values[key] = trim(leaf.data());
        }
    }
    return store;
}

void ConfigStore::set(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw UsageError("override '" + assignment + "' is not of the form key=value");
    set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void ConfigStore::set(const std::string& key, const std::string& value) { m_values[qualify(key)] = value; }

const std::string& ConfigStore::get(const std::string& key) const { return m_values.at(qualify(key)); }

RunConfig ConfigStore::resolve() const {
    RunConfig c;
    auto v = [&](const char* key) -> const std::string& { return m_values.at(key); };

    c.mode = parse_train_mode(trim(v("experiment.mode")));
    c.seeds.clear();
    for (const auto& s : split_list(v("experiment.seeds"))) c.seeds.push_back(parse_uint("experiment.seeds", s));
    require(!c.seeds.empty(), "seeds", "at least one seed is required");
    c.fewshot_n = parse_uint("experiment.fewshot_n", v("experiment.fewshot_n"));
    if (trim(v("experiment.epochs")) == "auto") {
        c.epochs = c.fewshot_n > 0 ? 30 : 3;
    } else {
        c.epochs = parse_uint("experiment.epochs", v("experiment.epochs"));
        require(c.epochs >= 1, "epochs", "must be at least 1");
    }
    c.eval_interval = parse_uint("experiment.eval_interval", v("experiment.eval_interval"));
    require(c.eval_interval >= 1, "eval_interval", "must be at least 1");
    c.workers = parse_uint("experiment.workers", v("experiment.workers"));
    c.dump_embeddings = parse_bool("experiment.dump_embeddings", v("experiment.dump_embeddings"));

    c.tau = parse_double("objective.tau", v("objective.tau"));
    require(c.tau > 0.0, "tau", "temperature must be > 0");
    c.lambda = parse_double("objective.lambda", v("objective.lambda"));
    require(c.lambda >= 0.0 && c.lambda <= 1.0, "lambda", "must lie in [0,1]");
    c.r = parse_preference("objective.r", v("objective.r"));
    if (c.mode == TrainMode::ce_epo) {
        require(c.r.strictly_positive(), "r", "ce_epo needs a strictly positive preference vector");
    }
    c.epsilon_balance = parse_double("objective.epsilon_balance", v("objective.epsilon_balance"));
    require(c.epsilon_balance > 0.0, "epsilon_balance", "must be > 0");

    c.optimizer.lr = parse_double("optimizer.lr", v("optimizer.lr"));
    require(c.optimizer.lr > 0.0, "lr", "must be > 0");
    c.optimizer.beta1 = parse_double("optimizer.beta1", v("optimizer.beta1"));
    require(c.optimizer.beta1 > 0.0 && c.optimizer.beta1 < 1.0, "beta1", "must lie in (0,1)");
    c.optimizer.beta2 = parse_double("optimizer.beta2", v("optimizer.beta2"));
    require(c.optimizer.beta2 > 0.0 && c.optimizer.beta2 < 1.0, "beta2", "must lie in (0,1)");
    c.optimizer.eps = parse_double("optimizer.eps", v("optimizer.eps"));
    require(c.optimizer.eps > 0.0, "eps", "must be > 0");
    c.optimizer.weight_decay = parse_double("optimizer.weight_decay", v("optimizer.weight_decay"));
    require(c.optimizer.weight_decay >= 0.0, "weight_decay", "must be >= 0");
    c.batch_size = parse_uint("optimizer.batch_size", v("optimizer.batch_size"));
    require(c.batch_size >= 4, "batch_size", "must be at least 4 (two rows for each of two classes)");

    const auto hash_dim = parse_uint("model.hash_dim", v("model.hash_dim"));
    require(hash_dim >= 2 && hash_dim <= UINT32_MAX, "hash_dim", "must lie in [2, 2^32)");
    c.vectorizer.hash_dim = static_cast<std::uint32_t>(hash_dim);
    const auto ngram = parse_uint("model.ngram_max", v("model.ngram_max"));
    require(ngram >= 1 && ngram <= 8, "ngram_max", "must lie in [1, 8]");
    c.vectorizer.ngram_max = static_cast<int>(ngram);
    c.vectorizer.hash_seed = parse_uint("model.hash_seed", v("model.hash_seed"));
    c.hidden = parse_uint("model.hidden", v("model.hidden"));
    require(c.hidden >= 1, "hidden", "must be at least 1");
    c.embedding_dim = parse_uint("model.embedding_dim", v("model.embedding_dim"));
    require(c.embedding_dim >= 1, "embedding_dim", "must be at least 1");
    c.dropout = parse_double("model.dropout", v("model.dropout"));
    require(c.dropout >= 0.0 && c.dropout < 1.0, "dropout", "must lie in [0,1)");

    c.data.train = trim(v("data.train"));
    c.data.dev = trim(v("data.dev"));
    const auto task = trim(v("data.task"));
    require(task == "single" || task == "pair", "task", "must be single or pair");
    c.data.schema.has_header = parse_bool("data.has_header", v("data.has_header"));
    auto text_col = trim(v("data.text_column"));
    if (text_col == "auto") text_col = task == "pair" ? "sentence1" : "sentence";
    c.data.schema.text_column = text_col;
    if (task == "pair") c.data.schema.text2_column = trim(v("data.text2_column"));
    c.data.schema.label_column = trim(v("data.label_column"));
    c.data.schema.labels = split_list(v("data.labels"));
    require(c.data.schema.labels.empty() || c.data.schema.labels.size() >= 2, "labels",
            "an explicit label list needs at least two labels");

    c.sweep.tau = parse_doubles("sweep.tau_grid", v("sweep.tau_grid"));
    for (double t : c.sweep.tau) require(t > 0.0, "tau_grid", "temperatures must be > 0");
    c.sweep.lambda = parse_doubles("sweep.lambda_grid", v("sweep.lambda_grid"));
    for (double l : c.sweep.lambda) require(l >= 0.0 && l <= 1.0, "lambda_grid", "values must lie in [0,1]");
    c.sweep.r1 = parse_doubles("sweep.r1_grid", v("sweep.r1_grid"));
    for (double r1 : c.sweep.r1) {
        require(r1 >= 0.0 && r1 <= 1.0, "r1_grid", "values must lie in [0,1]");
        if (c.mode == TrainMode::ce_epo) require(r1 > 0.0 && r1 < 1.0, "r1_grid", "ce_epo needs values in (0,1)");
    }

    c.toy.solver = parse_toy_solver(trim(v("toy.solver")));
    c.toy.dim = parse_uint("toy.dim", v("toy.dim"));
    require(c.toy.dim >= 1, "dim", "must be at least 1");
    c.toy.steps = static_cast<long>(parse_uint("toy.steps", v("toy.steps")));
    require(c.toy.steps >= 1, "steps", "must be at least 1");
    c.toy.step_size = parse_double("toy.step_size", v("toy.step_size"));
    require(c.toy.step_size > 0.0, "step_size", "must be > 0");
    c.toy.init_seed = parse_uint("toy.init_seed", v("toy.init_seed"));
    c.toy.init_radius = parse_double("toy.init_radius", v("toy.init_radius"));
    require(c.toy.init_radius >= 0.0, "init_radius", "must be >= 0");

    c.gradcheck.batches = parse_uint("gradcheck.batches", v("gradcheck.batches"));
    require(c.gradcheck.batches >= 1, "batches", "must be at least 1");
    c.gradcheck.probes = parse_uint("gradcheck.probes", v("gradcheck.probes"));
    require(c.gradcheck.probes >= 1, "probes", "must be at least 1");
    c.gradcheck.fd_step = parse_double("gradcheck.fd_step", v("gradcheck.fd_step"));
    require(c.gradcheck.fd_step > 0.0, "fd_step", "must be > 0");
    c.gradcheck.tolerance = parse_double("gradcheck.tolerance", v("gradcheck.tolerance"));
    require(c.gradcheck.tolerance > 0.0, "tolerance", "must be > 0");
    c.gradcheck.seed = parse_uint("gradcheck.gc_seed", v("gradcheck.gc_seed"));
    c.gradcheck.hash_dim = parse_uint("gradcheck.gc_hash_dim", v("gradcheck.gc_hash_dim"));
    require(c.gradcheck.hash_dim >= 2, "gc_hash_dim", "must be at least 2");
    c.gradcheck.hidden = parse_uint("gradcheck.gc_hidden", v("gradcheck.gc_hidden"));
    require(c.gradcheck.hidden >= 1, "gc_hidden", "must be at least 1");
    c.gradcheck.embedding_dim = parse_uint("gradcheck.gc_embedding_dim", v("gradcheck.gc_embedding_dim"));
    require(c.gradcheck.embedding_dim >= 1, "gc_embedding_dim", "must be at least 1");
    return c;
}

std::string ConfigStore::dump() const {
    std::ostringstream os;
    std::string section;
    for (const auto& k : kSchema) {
        const auto dot = k.key.find('.');
        const auto sec = k.key.substr(0, dot);
        if (sec != section) {
            if (!section.empty()) os << '\n';
            os << '[' << sec << "]\n";
            section = sec;
        }
        os << k.key.substr(dot + 1) << " = " << m_values.at(k.key) << '\n';
    }
    return os.str();
}

std::string ConfigStore::digest() const { return hex_digest(fnv1a64(dump())); }

std::string describe(const RunConfig& c) {
    std::ostringstream os;
    os.precision(17);
    os << "mode=" << to_string(c.mode) << ";tau=" << c.tau << ";lambda=" << c.lambda << ";r=" << c.r.to_string()
       << ";epsilon_balance=" << c.epsilon_balance << ";lr=" << c.optimizer.lr << ";beta1=" << c.optimizer.beta1
       << ";beta2=" << c.optimizer.beta2 << ";eps=" << c.optimizer.eps << ";wd=" << c.optimizer.weight_decay
       << ";batch=" << c.batch_size << ";hash_dim=" << c.vectorizer.hash_dim << ";ngram=" << c.vectorizer.ngram_max
       << ";hash_seed=" << c.vectorizer.hash_seed << ";hidden=" << c.hidden << ";embedding_dim=" << c.embedding_dim
       << ";dropout=" << c.dropout << ";fewshot_n=" << c.fewshot_n << ";epochs=" << c.epochs
       << ";eval_interval=" << c.eval_interval << ";seeds=";
    for (std::size_t i = 0; i < c.seeds.size(); ++i) os << (i ? "," : "") << c.seeds[i];
    return os.str();
}

std::string config_digest(const RunConfig& config) { return hex_digest(fnv1a64(describe(config))); }

}  // namespace paretoscl
