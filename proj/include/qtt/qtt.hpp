#pragma once

// Convenience header pulling in the whole library.

#include <qtt/decomp.hpp>
#include <qtt/io.hpp>
#include <qtt/parallel.hpp>
#include <qtt/random.hpp>
#include <qtt/sequence.hpp>
#include <qtt/stream.hpp>
#include <qtt/synth.hpp>
#include <qtt/tensor.hpp>
#include <qtt/transform.hpp>
