#pragma once

#include <string>

#include "config.hpp"
#include "geometry.hpp"
#include "patches.hpp"
#include "synth.hpp"

// Config-driven command implementations: each builds its inputs from a
// validated Config, runs the corresponding pipeline stage, writes flat
// tables / JSON reports under out_dir, and returns a small JSON summary of
// what was written. Identical config (plus overrides) always produces
// byte-identical outputs; no command touches its input files.
namespace cpcal::runner {

// Builders shared by commands and by the C API.
Geometry geometry_from(const config::Config& cfg);
Resonator resonator_from(const config::Config& cfg);
synth::PiezoMap piezo_from(const config::Config& cfg);
synth::Scenario scenario_from(const config::Config& cfg);
Deformation deformation_from(const config::Config& cfg);
patches::PatchSpectrum spectrum_from(const config::Config& cfg);

// Casimir force, PFA Coulomb force at the equivalent voltage, and the
// equivalent voltage itself for all three geometries at gap d.
std::string veq_table_text(double d);

std::string run_generate(const config::Config& cfg, const std::string& out_dir);
std::string run_fit(const config::Config& cfg, const std::string& dataset_path,
                    const std::string& out_dir);
std::string run_scan(const config::Config& cfg, const std::string& dataset_path,
                     const std::string& out_dir);
std::string run_residuals(const config::Config& cfg, const std::string& dataset_path,
                          const std::string& out_dir);
std::string run_deformation(const config::Config& cfg, const std::string& out_dir);
std::string run_patches(const config::Config& cfg, const std::string& out_dir);

}  // namespace cpcal::runner
