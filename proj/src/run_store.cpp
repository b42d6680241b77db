#include "ddb/run_store.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>
#include <random>
#include <sstream>

#include "ddb/errors.hpp"

namespace fs = std::filesystem;

namespace ddb {

const char* const kRecordHeader =
    "epoch,train_error,test_error,train_loss,test_loss,"
    "shape_bias,texture_bias,residual_bias,checkpoint_ref,wall_time";

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_double(const std::string& s, const char* field) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') {
        throw ValidationError(std::string("bad numeric field ") + field + ": " + s);
    }
    return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) { out.push_back(cur); cur.clear(); }
        else cur.push_back(c);
    }
    out.push_back(cur);
    return out;
}

std::string now_utc() {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string random_suffix() {
    std::random_device rd;
    std::mt19937_64 rng((static_cast<std::uint64_t>(rd()) << 32) ^ rd());
    static const char* hex = "0123456789abcdef";
    std::string s(8, '0');
    std::uint64_t v = rng();
    for (auto& c : s) { c = hex[v & 0xf]; v >>= 4; }
    return s;
}

}  // namespace

// ---------------------------------------------------------------- enums

std::string to_string(DatasetId v) {
    switch (v) {
        case DatasetId::cifar10: return "cifar10";
        case DatasetId::cifar100: return "cifar100";
        case DatasetId::custom: return "custom";
    }
    return "cifar10";
}
std::string to_string(ArchitectureId v) {
    switch (v) {
        case ArchitectureId::resnet18: return "resnet18";
        case ArchitectureId::mobilenetv2: return "mobilenetv2";
        case ArchitectureId::densenet121: return "densenet121";
        case ArchitectureId::efficientnetb0: return "efficientnetb0";
        case ArchitectureId::tinycnn: return "tinycnn";
    }
    return "resnet18";
}
std::string to_string(InitMode v) { return v == InitMode::scratch ? "scratch" : "pretrained"; }
std::string to_string(RunStatus v) {
    switch (v) {
        case RunStatus::running: return "running";
        case RunStatus::complete: return "complete";
        case RunStatus::failed: return "failed";
    }
    return "running";
}

DatasetId dataset_from_string(const std::string& s) {
    if (s == "cifar10") return DatasetId::cifar10;
    if (s == "cifar100") return DatasetId::cifar100;
    if (s == "custom") return DatasetId::custom;
    throw ValidationError("unknown dataset: " + s);
}
ArchitectureId architecture_from_string(const std::string& s) {
    if (s == "resnet18") return ArchitectureId::resnet18;
    if (s == "mobilenetv2") return ArchitectureId::mobilenetv2;
    if (s == "densenet121") return ArchitectureId::densenet121;
    if (s == "efficientnetb0") return ArchitectureId::efficientnetb0;
    if (s == "tinycnn") return ArchitectureId::tinycnn;
    throw ValidationError("unknown architecture: " + s);
}
InitMode init_from_string(const std::string& s) {
    if (s == "scratch") return InitMode::scratch;
    if (s == "pretrained") return InitMode::pretrained;
    throw ValidationError("unknown init mode: " + s);
}
RunStatus status_from_string(const std::string& s) {
    if (s == "running") return RunStatus::running;
    if (s == "complete") return RunStatus::complete;
    if (s == "failed") return RunStatus::failed;
    throw ValidationError("unknown status: " + s);
}

// ------------------------------------------------------------- RunConfig

void RunConfig::validate() const {
    if (noise_p < 0.0 || noise_p > 1.0) throw ValidationError("config: noise_p must be in [0, 1]");
    if (epochs < 0) throw ValidationError("config: epochs must be >= 0");
    if (probe_cadence < 1) throw ValidationError("config: probe_cadence must be >= 1");
    if (batch_size < 1) throw ValidationError("config: batch_size must be >= 1");
    if (!(learning_rate > 0.0)) throw ValidationError("config: learning_rate must be > 0");
}

std::string RunConfig::serialize() const {
    std::ostringstream out;
    out << "dataset=" << to_string(dataset) << '\n'
        << "architecture=" << to_string(architecture) << '\n'
        << "init=" << to_string(init) << '\n'
        << "noise_p=" << fmt_double(noise_p) << '\n'
        << "learning_rate=" << fmt_double(learning_rate) << '\n'
        << "batch_size=" << batch_size << '\n'
        << "epochs=" << epochs << '\n'
        << "seed=" << seed << '\n'
        << "probe_cadence=" << probe_cadence << '\n'
        << "probe_layers=";
    for (std::size_t i = 0; i < probe_layers.size(); ++i) {
        if (i) out << ',';
        out << probe_layers[i];
    }
    out << '\n'
        << "data_root=" << data_root << '\n'
        << "augmentation=" << (augmentation ? 1 : 0) << '\n';
    return out.str();
}

RunConfig RunConfig::parse(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ValidationError("config: bad line: " + line);
        const std::string key = line.substr(0, eq);
        const std::string val = line.substr(eq + 1);
        if (key == "dataset") cfg.dataset = dataset_from_string(val);
        else if (key == "architecture") cfg.architecture = architecture_from_string(val);
        else if (key == "init") cfg.init = init_from_string(val);
        else if (key == "noise_p") cfg.noise_p = parse_double(val, "noise_p");
        else if (key == "learning_rate") cfg.learning_rate = parse_double(val, "learning_rate");
        else if (key == "batch_size") cfg.batch_size = std::stoll(val);
        else if (key == "epochs") cfg.epochs = std::stoll(val);
        else if (key == "seed") cfg.seed = std::stoull(val);
        else if (key == "probe_cadence") cfg.probe_cadence = std::stoll(val);
        else if (key == "probe_layers") {
            cfg.probe_layers.clear();
            if (!val.empty()) {
                for (const auto& tok : split(val, ',')) cfg.probe_layers.push_back(std::stoi(tok));
            }
        } else if (key == "data_root") cfg.data_root = val;
        else if (key == "augmentation") cfg.augmentation = val == "1" || val == "true";
        else throw ValidationError("config: unknown key: " + key);
    }
    return cfg;
}

std::uint64_t RunConfig::hash() const {
    const std::string s = serialize();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

// ----------------------------------------------------------- EpochRecord

void EpochRecord::validate() const {
    if (epoch < 0) throw ValidationError("record: epoch must be >= 0");
    for (double e : {train_error, test_error}) {
        if (!(e >= 0.0 && e <= 100.0)) throw ValidationError("record: error must be in [0, 100]");
    }
    const int present = shape_bias.has_value() + texture_bias.has_value() + residual_bias.has_value();
    if (present != 0 && present != 3) {
        throw ValidationError("record: bias fields must be all present or all absent");
    }
    if (present == 3) {
        const double sum = *shape_bias + *texture_bias + *residual_bias;
        if (std::abs(sum - 1.0) > 1e-6) {
            throw ValidationError("record: bias fractions must sum to 1 within 1e-6");
        }
    }
    if (checkpoint_ref && checkpoint_ref->find(',') != std::string::npos) {
        throw ValidationError("record: checkpoint_ref must not contain commas");
    }
}

std::string format_record(const EpochRecord& r) {
    std::ostringstream out;
    out << r.epoch << ',' << fmt_double(r.train_error) << ',' << fmt_double(r.test_error) << ','
        << fmt_double(r.train_loss) << ',' << fmt_double(r.test_loss) << ','
        << (r.shape_bias ? fmt_double(*r.shape_bias) : "") << ','
        << (r.texture_bias ? fmt_double(*r.texture_bias) : "") << ','
        << (r.residual_bias ? fmt_double(*r.residual_bias) : "") << ','
        << (r.checkpoint_ref ? *r.checkpoint_ref : "") << ',' << fmt_double(r.wall_time);
    return out.str();
}

EpochRecord parse_record(const std::string& line) {
    const auto f = split(line, ',');
    if (f.size() != 10) throw ValidationError("record: expected 10 fields, got line: " + line);
    EpochRecord r;
    r.epoch = std::stoll(f[0]);
    r.train_error = parse_double(f[1], "train_error");
    r.test_error = parse_double(f[2], "test_error");
    r.train_loss = parse_double(f[3], "train_loss");
    r.test_loss = parse_double(f[4], "test_loss");
    if (!f[5].empty()) r.shape_bias = parse_double(f[5], "shape_bias");
    if (!f[6].empty()) r.texture_bias = parse_double(f[6], "texture_bias");
    if (!f[7].empty()) r.residual_bias = parse_double(f[7], "residual_bias");
    if (!f[8].empty()) r.checkpoint_ref = f[8];
    r.wall_time = parse_double(f[9], "wall_time");
    return r;
}

// -------------------------------------------------------------- RunStore

RunStore::RunStore(fs::path root) : root_(std::move(root)) {
    std::error_code ec;
    fs::create_directories(root_, ec);
    if (ec || !fs::is_directory(root_)) {
        throw IoError("store root not writable: " + root_.string());
    }
}

fs::path RunStore::run_dir(const std::string& run_id) const { return root_ / run_id; }
fs::path RunStore::checkpoint_dir(const std::string& run_id) const {
    return run_dir(run_id) / "checkpoints";
}

void RunStore::save_manifest(const RunManifest& m) const {
    const fs::path dir = run_dir(m.run_id);
    const fs::path tmp = dir / "manifest.tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw IoError("cannot write manifest for run " + m.run_id);
        out << "run_id=" << m.run_id << '\n'
            << "created_at=" << m.created_at << '\n'
            << "status=" << to_string(m.status) << '\n'
            << "record_count=" << m.record_count << '\n';
        std::istringstream cfg(m.config.serialize());
        std::string line;
        while (std::getline(cfg, line)) out << "config." << line << '\n';
        out.flush();
        if (!out) throw IoError("manifest write failed for run " + m.run_id);
    }
    fs::rename(tmp, dir / "manifest");
}

RunManifest RunStore::create_run(const RunConfig& config) {
    config.validate();
    RunManifest m;
    m.config = config;
    m.created_at = now_utc();
    m.status = RunStatus::running;
    m.record_count = 0;
    for (int attempt = 0; attempt < 16; ++attempt) {
        m.run_id = "run-" + random_suffix();
        std::error_code ec;
        if (fs::create_directory(run_dir(m.run_id), ec) && !ec) break;
        m.run_id.clear();
    }
    if (m.run_id.empty()) throw IoError("could not allocate a unique run directory");
    fs::create_directories(checkpoint_dir(m.run_id));
    {
        std::ofstream rec(run_dir(m.run_id) / "records", std::ios::trunc);
        rec << kRecordHeader << '\n';
        if (!rec) throw IoError("cannot create records file");
    }
    save_manifest(m);
    return m;
}

RunManifest RunStore::load_manifest(const std::string& run_id) const {
    std::ifstream in(run_dir(run_id) / "manifest");
    if (!in) throw IoError("run not found: " + run_id);
    RunManifest m;
    std::string line, cfg_text;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = line.substr(0, eq);
        const std::string val = line.substr(eq + 1);
        if (key == "run_id") m.run_id = val;
        else if (key == "created_at") m.created_at = val;
        else if (key == "status") m.status = status_from_string(val);
        else if (key == "record_count") m.record_count = std::stoll(val);
        else if (key.rfind("config.", 0) == 0) cfg_text += key.substr(7) + "=" + val + "\n";
    }
    m.config = RunConfig::parse(cfg_text);
    return m;
}

std::vector<EpochRecord> RunStore::load_records(const std::string& run_id) const {
    std::ifstream in(run_dir(run_id) / "records", std::ios::binary);
    if (!in) throw IoError("run not found: " + run_id);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::vector<EpochRecord> records;
    std::size_t pos = 0;
    bool first = true;
    while (pos < content.size()) {
        const auto nl = content.find('\n', pos);
        if (nl == std::string::npos) break;  // partial trailing line from a live writer
        const std::string line = content.substr(pos, nl - pos);
        pos = nl + 1;
        if (first) {
            first = false;
            if (line != kRecordHeader) throw ValidationError("records: unexpected header");
            continue;
        }
        if (line.empty()) continue;
        records.push_back(parse_record(line));
    }
    return records;
}

RunManifest RunStore::append_epoch_record(const std::string& run_id, const EpochRecord& record) {
    RunManifest m = load_manifest(run_id);
    if (m.status == RunStatus::complete) {
        throw StateError("append to completed run " + run_id);
    }
    record.validate();
    if (record.epoch != m.record_count) {
        throw SequencingError("expected epoch " + std::to_string(m.record_count) + ", got " +
                              std::to_string(record.epoch));
    }
    std::ofstream out(run_dir(run_id) / "records", std::ios::app | std::ios::binary);
    if (!out) throw IoError("cannot append to records of run " + run_id);
    out << format_record(record) << '\n';
    out.flush();
    if (!out) throw IoError("record append failed for run " + run_id);
    m.record_count += 1;
    save_manifest(m);
    return m;
}

RunManifest RunStore::reopen_run(const std::string& run_id) {
    RunManifest m = load_manifest(run_id);
    // Drop a torn trailing line left by an interrupted writer: readers
    // already ignore it, and the next append must not extend it.
    const fs::path records_path = run_dir(run_id) / "records";
    {
        std::ifstream in(records_path, std::ios::binary);
        if (!in) throw IoError("records file missing for run " + run_id);
        std::ostringstream ss;
        ss << in.rdbuf();
        const std::string text = ss.str();
        const auto last_newline = text.rfind('\n');
        const std::uintmax_t keep = last_newline == std::string::npos ? 0 : last_newline + 1;
        if (keep != text.size()) fs::resize_file(records_path, keep);
    }
    m.record_count = static_cast<std::int64_t>(load_records(run_id).size());
    m.status = RunStatus::running;
    save_manifest(m);
    return m;
}

RunManifest RunStore::finalize_run(const std::string& run_id, RunStatus status) {
    RunManifest m = load_manifest(run_id);
    m.status = status;
    save_manifest(m);
    return m;
}

const std::vector<std::string>& RunStore::metric_names() {
    static const std::vector<std::string> names = {
        "train_error", "test_error", "train_loss", "test_loss",
        "shape_bias", "texture_bias", "residual_bias", "wall_time"};
    return names;
}

TimeSeries RunStore::load_run_series(const std::string& run_id,
                                     const std::string& metric_name) const {
    const auto& names = metric_names();
    if (std::find(names.begin(), names.end(), metric_name) == names.end()) {
        throw LookupError("unknown metric: " + metric_name);
    }
    TimeSeries ts;
    for (const auto& r : load_records(run_id)) {
        std::optional<double> v;
        if (metric_name == "train_error") v = r.train_error;
        else if (metric_name == "test_error") v = r.test_error;
        else if (metric_name == "train_loss") v = r.train_loss;
        else if (metric_name == "test_loss") v = r.test_loss;
        else if (metric_name == "shape_bias") v = r.shape_bias;
        else if (metric_name == "texture_bias") v = r.texture_bias;
        else if (metric_name == "residual_bias") v = r.residual_bias;
        else if (metric_name == "wall_time") v = r.wall_time;
        if (v) {
            ts.epochs.push_back(r.epoch);
            ts.values.push_back(*v);
        }
    }
    return ts;
}

}  // namespace ddb
