#include "sdfplan/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sdfplan/errors.hpp"

namespace sdfplan {

using nlohmann::json;

namespace {

// Reads j[key] into out when present; unknown keys are rejected so typos surface.
class Section {
public:
    Section(const json& root, std::string name) : name_(std::move(name)) {
        if (root.contains(name_)) {
            j_ = root.at(name_);
            if (!j_.is_object()) throw InputError(name_ + ": expected an object");
        }
    }

    template <class T>
    void get(const char* key, T& out) {
        seen_.push_back(key);
        if (!j_.contains(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception&) {
            throw InputError(name_ + "." + key + ": wrong type");
        }
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end())
                throw InputError(name_ + "." + it.key() + ": unknown setting");
    }

private:
    json j_ = json::object();
    std::string name_;
    std::vector<std::string> seen_;
};

}  // namespace

RunConfig parse_run_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("config: malformed JSON: ") + e.what());
    }
    if (!root.is_object() || root.value("format", "") != "sdfplan-config")
        throw InputError("config: format must be \"sdfplan-config\"");
    if (root.value("version", 0) != 1) throw InputError("config: unsupported version");
    for (auto it = root.begin(); it != root.end(); ++it) {
        static const char* known[] = {"format", "version", "planner", "cost", "train", "synthesis", "description"};
        if (std::find(std::begin(known), std::end(known), it.key()) == std::end(known))
            throw InputError("config: unknown section '" + it.key() + "'");
    }

    RunConfig c;
    Section p(root, "planner");
    p.get("H", c.planner.H);
    p.get("num_samples", c.planner.num_samples);
    p.get("iters", c.planner.iters);
    p.get("gamma", c.planner.gamma);
    p.get("sigma_f_init", c.planner.sigma_f_init);
    p.get("sigma_min", c.planner.sigma_min);
    p.get("eta", c.planner.eta);
    p.get("h", c.planner.h);
    p.get("kernel_update", c.planner.kernel_update);
    p.get("early_stop", c.planner.early_stop);
    p.get("early_stop_window", c.planner.early_stop_window);
    p.get("early_stop_tol", c.planner.early_stop_tol);
    p.get("keep_mean_every", c.planner.keep_mean_every);
    p.get("far_field_margin", c.far_field_margin);
    p.finish();

    json cost = root.value("cost", json::object());
    Section ob(cost, "obstacle"), ln(cost, "length"), bd(cost, "boundary");
    ob.get("epsilon", c.cost.obstacle.epsilon);
    ob.get("interp_points", c.cost.obstacle.interp_points);
    ob.get("weight", c.cost.obstacle.weight);
    ob.finish();
    ln.get("weight", c.cost.length.weight);
    ln.finish();
    bd.get("z_floor", c.cost.boundary.z_floor);
    bd.get("weight", c.cost.boundary.weight);
    bd.get("enabled", c.cost.boundary.enabled);
    bd.finish();

    Section t(root, "train");
    t.get("epochs", c.train.epochs);
    t.get("batch_size", c.train.batch_size);
    t.get("learning_rate", c.train.learning_rate);
    t.get("lr_step_epochs", c.train.lr_step_epochs);
    t.get("lr_step_factor", c.train.lr_step_factor);
    t.get("lambda_d", c.train.lambda_d);
    t.get("lambda_n", c.train.lambda_n);
    t.get("validation_fraction", c.train.validation_fraction);
    t.finish();

    Section s(root, "synthesis");
    s.get("offsets", c.synthesis.offsets);
    s.get("offset_scale", c.offset_scale);
    s.get("max_samples", c.synthesis.max_samples);
    s.get("normal_consistency", c.synthesis.normal_consistency);
    s.get("reprojection_factor", c.synthesis.reprojection_factor);
    s.finish();

    c.planner.validate();
    c.cost.validate();
    c.train.validate();
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("config file not found: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str());
}

std::string RunConfig::to_json() const {
    json j;
    j["format"] = "sdfplan-config";
    j["version"] = 1;
    j["planner"] = {{"H", planner.H},
                    {"num_samples", planner.num_samples},
                    {"iters", planner.iters},
                    {"gamma", planner.gamma},
                    {"sigma_f_init", planner.sigma_f_init},
                    {"sigma_min", planner.sigma_min},
                    {"eta", planner.eta},
                    {"h", planner.h},
                    {"kernel_update", planner.kernel_update},
                    {"early_stop", planner.early_stop},
                    {"early_stop_window", planner.early_stop_window},
                    {"early_stop_tol", planner.early_stop_tol},
                    {"keep_mean_every", planner.keep_mean_every},
                    {"far_field_margin", far_field_margin}};
    j["cost"] = {{"obstacle",
                  {{"epsilon", cost.obstacle.epsilon},
                   {"interp_points", cost.obstacle.interp_points},
                   {"weight", cost.obstacle.weight}}},
                 {"length", {{"weight", cost.length.weight}}},
                 {"boundary",
                  {{"z_floor", cost.boundary.z_floor}, {"weight", cost.boundary.weight}, {"enabled", cost.boundary.enabled}}}};
    j["train"] = {{"epochs", train.epochs},
                  {"batch_size", train.batch_size},
                  {"learning_rate", train.learning_rate},
                  {"lr_step_epochs", train.lr_step_epochs},
                  {"lr_step_factor", train.lr_step_factor},
                  {"lambda_d", train.lambda_d},
                  {"lambda_n", train.lambda_n},
                  {"validation_fraction", train.validation_fraction}};
    j["synthesis"] = {{"offsets", synthesis.offsets},
                      {"offset_scale", offset_scale},
                      {"max_samples", synthesis.max_samples},
                      {"normal_consistency", synthesis.normal_consistency},
                      {"reprojection_factor", synthesis.reprojection_factor}};
    return j.dump(2) + "\n";
}

}  // namespace sdfplan
