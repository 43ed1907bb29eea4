int header_len(int fd) {
    char hdr[4];
    int len;
    len = read(fd, hdr, 4); // source:a
    if (len < 0) {
        return 0;
    }
    len = hdr[0] * 256 + hdr[1];
    return len;
}

int main(int fd) {
    int body;
    int pad;
    body = header_len(fd);
    pad = 16;
    malloc(body + pad); // sink:a
    malloc(pad); // clean
    return 0;
}
