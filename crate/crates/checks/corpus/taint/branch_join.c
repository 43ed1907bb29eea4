int main(int fd, int mode) {
    char buf[64];
    char out[64];
    int len;
    len = 8;
    if (mode > 1) {
        len = read(fd, buf, 64); // source:a
    } else {
        len = 4;
    }
    memcpy(out, buf, len); // sink:a
    strcpy(out, "ok"); // clean
    return 0;
}
