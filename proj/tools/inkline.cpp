#include "inkline/engine.hpp"
#include "inkline/error.hpp"
#include "inkline/providers.hpp"
#include "inkline/recipe.hpp"
#include "inkline/service.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    CLI::App app{"inkline: text-driven infographic authoring engine"};
    app.require_subcommand(1);

    inkline::recipe::Options run;
    std::string data;
    bool seedless = false;
    auto* runCmd = app.add_subcommand("run", "Reproduce an infographic from a recipe file");
    runCmd->add_option("--recipe", run.recipe, "Recipe file")->required()->check(CLI::ExistingFile);
    runCmd->add_option("--out", run.out, "Output directory")->required();
    runCmd->add_option("--data", data, "Dataset file (overrides the recipe's)")->check(CLI::ExistingFile);
    runCmd->add_option("--provider", run.provider, "Provider suite")
        ->check(CLI::IsMember({"fallback", "remote"}))
        ->capture_default_str();
    runCmd->add_flag("--seedless", seedless, "Reserved; fallback providers are deterministic");
    runCmd->add_option("--export", run.exportMode, "Export format")
        ->check(CLI::IsMember({"svg", "frames", "both"}))
        ->capture_default_str();

    std::string root = "inkline-data";
    inkline::service::ServerOptions serve = inkline::service::ServerOptions::from_env();
    std::string provider;
    auto* serveCmd = app.add_subcommand("serve", "Serve the HTTP API");
    serveCmd->add_option("--root", root, "State directory")->capture_default_str();
    serveCmd->add_option("--host", serve.host)->capture_default_str();
    serveCmd->add_option("--port", serve.port)->capture_default_str();
    serveCmd->add_option("--provider", provider, "fallback or remote (default: remote when INKLINE_PROVIDER_URL is set)");

    std::string manifest;
    auto* indexCmd = app.add_subcommand("index", "Index a gallery manifest into the state directory");
    indexCmd->add_option("manifest", manifest, "Gallery manifest")->required()->check(CLI::ExistingFile);
    indexCmd->add_option("--root", root, "State directory")->capture_default_str();
    indexCmd->add_option("--provider", provider, "fallback or remote");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*runCmd) {
            if (!data.empty()) run.dataOverride = data;
            auto result = inkline::recipe::run_recipe(run);
            if (!result.ok) {
                std::cerr << "error";
                if (result.failedStep) std::cerr << " at step " << *result.failedStep;
                std::cerr << ": " << result.error << "\n";
                return 1;
            }
            std::cout << "wrote " << (run.out / "report.json").string() << "\n";
            return 0;
        }
        if (*serveCmd) {
            inkline::Engine engine(root, inkline::providers::make_provider(provider));
            inkline::service::Server server(engine, serve);
            std::cout << "listening on " << serve.host << ":" << serve.port << std::endl;
            server.run();
            return 0;
        }
        if (*indexCmd) {
            inkline::Engine engine(root, inkline::providers::make_provider(provider));
            auto report = engine.index_gallery(manifest);
            std::cout << "indexed " << report.indexed << " assets\n";
            for (const auto& [id, why] : report.skipped) std::cout << "skipped " << id << ": " << why << "\n";
            return 0;
        }
    } catch (const inkline::Error& e) {
        std::cerr << e.code() << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
