#pragma once

#define ERGOLAB_VERSION "0.1.0"
