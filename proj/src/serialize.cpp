#include "relucc/serialize.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace relucc {

using nlohmann::json;

std::string dtos(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double stod_exact(std::string_view s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw std::invalid_argument("stod_exact: malformed number '" + std::string(s) + "'");
    return v;
}

namespace {

json parse(const std::string& text, const char* what) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded())
        throw std::invalid_argument(std::string(what) + ": malformed JSON");
    return j;
}

std::vector<double> number_array(const json& j, const char* what) {
    if (!j.is_array()) throw std::invalid_argument(std::string(what) + ": expected array");
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& e : j) {
        if (e.is_string())
            out.push_back(stod_exact(e.get<std::string>()));
        else if (e.is_number())
            out.push_back(e.get<double>());
        else
            throw std::invalid_argument(std::string(what) + ": expected number");
    }
    return out;
}

}  // namespace

std::string to_json(const CPwL& f) {
    json j;
    j["breakpoints"] = f.breakpoints();
    j["values"] = f.values();
    return j.dump();
}

CPwL cpwl_from_json(const std::string& text) {
    json j = parse(text, "cpwl_from_json");
    if (!j.contains("breakpoints") || !j.contains("values"))
        throw std::invalid_argument("cpwl_from_json: missing breakpoints/values");
    return CPwL(number_array(j["breakpoints"], "cpwl_from_json"),
                number_array(j["values"], "cpwl_from_json"));
}

std::string to_json(const Mask& m) {
    json j;
    j["name"] = m.name;
    j["coefficients"] = m.coefficients;
    return j.dump();
}

Mask mask_from_json(const std::string& text) {
    json j = parse(text, "mask_from_json");
    if (!j.contains("coefficients"))
        throw std::invalid_argument("mask_from_json: missing coefficients");
    std::string name = j.value("name", "");
    return Mask(number_array(j["coefficients"], "mask_from_json"), name);
}

std::string to_json(const ReluNet& net) {
    json j;
    j["input_dim"] = net.input_dim();
    j["output_dim"] = net.output_dim();
    j["domain"] = {net.domain_lo(), net.domain_hi()};
    json layers = json::array();
    for (const auto& l : net.layers()) {
        if (!l.all_identity() && !l.all_relu())
            throw std::invalid_argument("to_json: mixed activations; lower the network first");
        json weights = json::array();
        for (std::size_t i = 0; i < l.out_dim(); ++i) {
            json row = json::array();
            for (std::size_t c = 0; c < l.in_dim(); ++c) row.push_back(dtos(l.W(i, c)));
            weights.push_back(std::move(row));
        }
        json bias = json::array();
        for (double b : l.bias) bias.push_back(dtos(b));
        json jl;
        jl["weights"] = std::move(weights);
        jl["bias"] = std::move(bias);
        jl["activation"] = l.all_identity() ? "identity" : "relu";
        layers.push_back(std::move(jl));
    }
    j["layers"] = std::move(layers);
    return j.dump();
}

ReluNet net_from_json(const std::string& text) {
    json j = parse(text, "net_from_json");
    for (const char* key : {"input_dim", "output_dim", "domain", "layers"})
        if (!j.contains(key))
            throw std::invalid_argument(std::string("net_from_json: missing ") + key);
    std::vector<double> dom = number_array(j["domain"], "net_from_json domain");
    if (dom.size() != 2) throw std::invalid_argument("net_from_json: domain must be [lo, hi]");
    std::vector<Layer> layers;
    for (const auto& jl : j["layers"]) {
        std::string act = jl.value("activation", "");
        if (act != "relu" && act != "identity")
            throw std::invalid_argument("net_from_json: unknown activation '" + act + "'");
        if (!jl.contains("weights") || !jl.contains("bias"))
            throw std::invalid_argument("net_from_json: layer missing weights/bias");
        std::vector<std::vector<double>> rows;
        for (const auto& r : jl["weights"]) rows.push_back(number_array(r, "net_from_json weights"));
        std::vector<double> bias = number_array(jl["bias"], "net_from_json bias");
        if (rows.empty() || rows.size() != bias.size())
            throw std::invalid_argument("net_from_json: weights/bias shape mismatch");
        Matrix w(rows.size(), rows.front().size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != w.cols)
                throw std::invalid_argument("net_from_json: ragged weight rows");
            for (std::size_t c = 0; c < w.cols; ++c) w(i, c) = rows[i][c];
        }
        layers.emplace_back(std::move(w), std::move(bias),
                            act == "relu" ? Act::Relu : Act::Identity);
    }
    if (layers.empty()) throw std::invalid_argument("net_from_json: no layers");
    ReluNet net(std::move(layers), dom[0], dom[1]);
    if (net.input_dim() != j["input_dim"].get<int>() ||
        net.output_dim() != j["output_dim"].get<int>())
        throw std::invalid_argument("net_from_json: declared dims do not match layers");
    return net;
}

std::string report_json(const Report& rep, bool with_devs, int width_bound, int depth_bound,
                        CompileStage stage) {
    json j;
    if (with_devs) {
        j["max_dev"] = rep.max_dev;
        j["mean_dev"] = rep.mean_dev;
    } else {
        j["max_dev"] = nullptr;
        j["mean_dev"] = nullptr;
    }
    j["width"] = rep.width;
    j["depth"] = rep.depth;
    j["params"] = rep.params;
    j["bounds_ok"] = rep.bounds_ok;
    j["width_bound"] = width_bound;
    j["depth_bound"] = depth_bound;
    j["stage"] = to_string(stage);
    return j.dump();
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::filesystem::path p(path);
    if (p.has_parent_path() && !std::filesystem::exists(p.parent_path()))
        throw std::runtime_error("output directory does not exist: " + p.parent_path().string());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace relucc
