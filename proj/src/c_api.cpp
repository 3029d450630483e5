#include "daqd/daqd.h"

#include "daqd/config.hpp"
#include "daqd/experiments.hpp"
#include "daqd/plot.hpp"

#include <algorithm>
#include <cstring>
#include <memory>
#include <new>
#include <optional>
#include <string>

struct daqd_config {
    std::optional<daqd::Command> command;
    daqd::ConfigStore store;

    daqd::RunConfig resolve() const { return command ? store.resolve(*command) : store.resolve(); }
};

namespace {

thread_local std::string g_last_error;

daqd_status status_of(daqd::ErrorKind k)
{
    switch (k) {
    case daqd::ErrorKind::Dimension:
        return DAQD_ERR_DIMENSION;
    case daqd::ErrorKind::Numeric:
        return DAQD_ERR_NUMERIC;
    case daqd::ErrorKind::Parse:
        return DAQD_ERR_PARSE;
    case daqd::ErrorKind::Io:
        return DAQD_ERR_IO;
    case daqd::ErrorKind::Config:
        return DAQD_ERR_CONFIG;
    case daqd::ErrorKind::State:
        return DAQD_ERR_STATE;
    }
    return DAQD_ERR_INTERNAL;
}

template <class F>
daqd_status guarded(F&& f)
{
    g_last_error.clear();
    try {
        f();
        return DAQD_OK;
    } catch (const daqd::Error& e) {
        g_last_error = e.what();
        return status_of(e.kind());
    } catch (const std::filesystem::filesystem_error& e) {
        g_last_error = e.what();
        return DAQD_ERR_IO;
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return DAQD_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return DAQD_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return DAQD_ERR_INTERNAL;
    }
}

daqd_status argument_error(const char* what)
{
    g_last_error = what;
    return DAQD_ERR_ARGUMENT;
}

void copy_out(const std::string& s, char* buf, size_t cap, size_t* len)
{
    if (len)
        *len = s.size();
    if (buf && cap > 0) {
        const size_t n = std::min(cap - 1, s.size());
        std::memcpy(buf, s.data(), n);
        buf[n] = '\0';
    }
}

} // namespace

extern "C" {

const char* daqd_version(void)
{
    static const std::string v = daqd::library_version();
    return v.c_str();
}

const char* daqd_status_name(daqd_status status)
{
    switch (status) {
    case DAQD_OK:
        return "ok";
    case DAQD_ERR_ARGUMENT:
        return "invalid argument";
    case DAQD_ERR_CONFIG:
        return "config error";
    case DAQD_ERR_PARSE:
        return "parse error";
    case DAQD_ERR_IO:
        return "io error";
    case DAQD_ERR_NUMERIC:
        return "numeric error";
    case DAQD_ERR_DIMENSION:
        return "dimension error";
    case DAQD_ERR_STATE:
        return "state error";
    case DAQD_ERR_INTERNAL:
        return "internal error";
    }
    return "unknown status";
}

const char* daqd_last_error(void)
{
    return g_last_error.c_str();
}

daqd_status daqd_config_create(const char* command, daqd_config** out)
{
    if (!out)
        return argument_error("daqd_config_create: out is NULL");
    *out = nullptr;
    return guarded([&] {
        auto cfg = std::make_unique<daqd_config>();
        if (command) {
            cfg->command = daqd::command_from_string(command);
            cfg->store.set("run.command", command);
        }
        *out = cfg.release();
    });
}

void daqd_config_destroy(daqd_config* cfg)
{
    delete cfg;
}

daqd_status daqd_config_read_file(daqd_config* cfg, const char* path)
{
    if (!cfg || !path)
        return argument_error("daqd_config_read_file: NULL argument");
    return guarded([&] {
        cfg->store.read_file(path);
        if (cfg->command)
            cfg->store.set("run.command", daqd::to_string(*cfg->command));
    });
}

daqd_status daqd_config_set(daqd_config* cfg, const char* key, const char* value)
{
    if (!cfg || !key || !value)
        return argument_error("daqd_config_set: NULL argument");
    return guarded([&] { cfg->store.set(key, value); });
}

daqd_status daqd_config_override(daqd_config* cfg, const char* assignment)
{
    if (!cfg || !assignment)
        return argument_error("daqd_config_override: NULL argument");
    return guarded([&] { cfg->store.apply_override(assignment); });
}

daqd_status daqd_config_get(const daqd_config* cfg, const char* key, char* buf, size_t cap, size_t* len)
{
    if (!cfg || !key)
        return argument_error("daqd_config_get: NULL argument");
    return guarded([&] { copy_out(daqd::config_value(cfg->resolve(), key), buf, cap, len); });
}

daqd_status daqd_config_render(const daqd_config* cfg, char* buf, size_t cap, size_t* len)
{
    if (!cfg)
        return argument_error("daqd_config_render: NULL argument");
    return guarded([&] { copy_out(daqd::render_config(cfg->resolve()), buf, cap, len); });
}

daqd_status daqd_execute(const daqd_config* cfg, char* out_dir, size_t cap, size_t* len)
{
    if (!cfg)
        return argument_error("daqd_execute: NULL config");
    return guarded([&] {
        const daqd::RunConfig rc = cfg->resolve();
        daqd::execute(rc);
        copy_out(rc.output_dir.string(), out_dir, cap, len);
    });
}

daqd_status daqd_replay(const char* manifest_path, const char* output_dir)
{
    if (!manifest_path)
        return argument_error("daqd_replay: NULL manifest path");
    return guarded([&] { daqd::replay_manifest(manifest_path, output_dir ? output_dir : ""); });
}

daqd_status daqd_plot(const char* const* csv_paths, size_t n_paths, const char* out_dir)
{
    if ((!csv_paths && n_paths > 0) || !out_dir)
        return argument_error("daqd_plot: NULL argument");
    return guarded([&] {
        std::vector<std::filesystem::path> csvs;
        for (size_t i = 0; i < n_paths; ++i) {
            if (!csv_paths[i])
                throw daqd::ConfigError("daqd_plot: NULL path at index " + std::to_string(i));
            csvs.emplace_back(csv_paths[i]);
        }
        daqd::plot_metrics(csvs, out_dir);
    });
}

} // extern "C"
