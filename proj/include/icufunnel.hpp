/*
* Copyright (C) 2026 icufunnel contributors
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
*/
#ifndef ICUFUNNEL_ICUFUNNEL_HPP
#define ICUFUNNEL_ICUFUNNEL_HPP

#include "icufunnel/analysis.hpp"
#include "icufunnel/constants.hpp"
#include "icufunnel/controller.hpp"
#include "icufunnel/io.hpp"
#include "icufunnel/model.hpp"
#include "icufunnel/simulator.hpp"

#endif // ICUFUNNEL_ICUFUNNEL_HPP
