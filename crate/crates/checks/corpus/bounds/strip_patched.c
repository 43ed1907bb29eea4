int put_pixels(char raster[], int value) {
    raster[0] = value;
    return 0;
}

int strip_contig(int width, int col_offset, int row_offset) {
    char buf[256];
    char raster[64];
    int pos;
    int pixel;
    if (col_offset < 0 || col_offset >= width) {
        return 0;
    }
    pos = row_offset * width + col_offset;
    pixel = buf[pos];
    put_pixels(raster, pixel);
    return 1;
}
