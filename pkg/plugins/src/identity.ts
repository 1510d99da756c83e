#!/usr/bin/env node
/** Identity denoiser plugin: echoes every payload byte-for-byte. */

import { identity } from "./denoisers";
import { serve } from "./server";

serve(identity);
